# -*- coding: utf-8 -*-

""" Lag selection, residual autocorrelation, unit-root and CUSUM tests. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging

import numpy as np
import scipy.special
from statsmodels.tsa.adfvalues import mackinnoncrit, mackinnonp

import varcast
from varcast.exceptions import (DataError, DomainError, EstimationError,
                                NumericalError)
from varcast.ingest import MetricFrame
from varcast.varmodel import (companion, fit_var, is_stable, lagged_design,
                              least_squares)

DEFAULT_ALPHA = 0.05
DEFAULT_P_MAX = 15
DEFAULT_LM_H = 10
# 95% level of the supremum of a Brownian bridge.
CUSUM_BOUNDARY = 1.358
# Deterministic terms of the ADF regression: `c' constant, `ct' constant + trend.
ADF_SPECS = ('c', 'ct')
# ADF p-values are clamped to this range.
ADF_P_FLOOR = 0.001
ADF_P_CEIL = 0.999
ADF_LEVELS = ('1%', '5%', '10%')

log = logging.getLogger(__name__)


class AicScan(object):
    """ AIC(p) for p = 1..p_max, infinite where the fit failed. """
    def __init__(self, values, n_obs):
        self.values = np.asarray(values, dtype=np.float64)
        self.n_obs = n_obs
        finite = np.isfinite(self.values)
        if not finite.any():
            raise NumericalError('no lag order in 1..{0} could be fitted'.format(len(values)))
        # argmin returns the first minimum, i.e. the smallest p on ties
        self.best_p = int(np.argmin(np.where(finite, self.values, np.inf))) + 1

    @property
    def p_max(self):
        return len(self.values)

    def ranked(self):
        """ Lag orders sorted by increasing AIC, failed fits excluded. """
        order = np.argsort(self.values, kind='stable')
        return [int(i) + 1 for i in order if np.isfinite(self.values[i])]

    def __repr__(self):
        return '<AicScan p_max={0}, best_p={1}>'.format(self.p_max, self.best_p)


class TestResult(object):
    """ Outcome of a hypothesis test.

    `decision' is `reject' when p_value < alpha, `fail-to-reject' otherwise.

    """
    # keeps test runners from collecting this class
    __test__ = False

    def __init__(self, name, statistic, p_value, df, alpha=DEFAULT_ALPHA, **extra):
        self.name = name
        self.statistic = float(statistic)
        self.p_value = float(min(max(p_value, 0.), 1.))
        self.df = df
        self.alpha = alpha
        self.extra = extra

    @property
    def rejected(self):
        return self.p_value < self.alpha

    @property
    def decision(self):
        return 'reject' if self.rejected else 'fail-to-reject'

    def to_dict(self):
        d = {'test': self.name, 'stat': self.statistic, 'p': self.p_value,
             'df': list(self.df), 'decision': self.decision}
        d.update(self.extra)
        return d

    def __repr__(self):
        return '<TestResult {0}: stat={1:.4f}, p={2:.4g}, {3}>'.format(self.name,
                                                                      self.statistic,
                                                                      self.p_value,
                                                                      self.decision)


class CusumPath(object):
    """ OLS-CUSUM process of one variable over normalized time [0, 1]. """
    def __init__(self, name, path, boundary=CUSUM_BOUNDARY):
        self.name = name
        self.path = path
        self.boundary = boundary
        self.times = np.linspace(0., 1., len(path))

    @property
    def max_excursion(self):
        return float(np.max(np.abs(self.path)))

    @property
    def crossed(self):
        return self.max_excursion > self.boundary

    def __repr__(self):
        return '<CusumPath {0}: max={1:.3f}, crossed={2}>'.format(self.name,
                                                                 self.max_excursion,
                                                                 self.crossed)


class DiagnosticReport(object):
    """ Results of the whole battery, see `run_diagnostics'. """
    def __init__(self, aic, lm, es, adf, cusum, stability, p, adf_spec, adf_lag):
        self.aic = aic
        self.lm = lm
        self.es = es
        self.adf = adf
        self.cusum = cusum
        self.stability = stability
        self.p = p
        self.adf_spec = adf_spec
        self.adf_lag = adf_lag

    def to_dict(self):
        cm = self.stability
        return {'aic': [v if np.isfinite(v) else None for v in self.aic.values.tolist()],
                'best_p': self.aic.best_p,
                'p': self.p,
                'lm': [dict(r.to_dict(), lag=lag) for lag, rs in sorted(self.lm.items())
                       for r in rs],
                'es': [dict(r.to_dict(), lag=lag) for lag, rs in sorted(self.es.items())
                       for r in rs],
                'adf': dict((name, r.to_dict()) for name, r in self.adf.items()),
                'adf_spec': self.adf_spec,
                'adf_lag': self.adf_lag,
                'cusum': {'crossed': any(c.crossed for c in self.cusum),
                          'max_excursion': max(c.max_excursion for c in self.cusum),
                          'boundary': CUSUM_BOUNDARY,
                          'variables': dict((c.name, {'crossed': c.crossed,
                                                      'max_excursion': c.max_excursion})
                                            for c in self.cusum)},
                'stability': {'max_modulus': cm.max_modulus,
                              'stable': is_stable(cm)}}


def tail_probability(dist, x, *df):
    """ Upper-tail probability P(X > x).

    `dist' is `chi2' (one degree of freedom argument) or `f' (two).

    """
    if dist not in ('chi2', 'f'):
        raise DomainError('unknown distribution {0}'.format(dist))
    expected = 1 if dist == 'chi2' else 2
    if len(df) != expected:
        raise DomainError('{0} takes {1} degrees of freedom, got {2}'.format(dist, expected,
                                                                           len(df)))
    if any(not d > 0 for d in df):
        raise DomainError('degrees of freedom must be positive, got {0}'.format(df))
    if not x >= 0:
        raise DomainError('statistic must be >= 0, got {0}'.format(x))
    if x == 0:
        return 1.
    if dist == 'chi2':
        return float(scipy.special.chdtrc(df[0], x))
    return float(scipy.special.fdtrc(df[0], df[1], x))


def _logdet(sigma):
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        return np.inf
    return logdet


def aic_scan(frame, p_max=DEFAULT_P_MAX):
    """ AIC(p) = log|Sigma_e| + 2 p N^2 / T for p = 1..p_max.

    Every order is fitted on the same T = L - p_max targets.

    """
    data = frame.data if isinstance(frame, MetricFrame) else np.atleast_2d(frame)
    n, length = data.shape
    if p_max < 1:
        raise DataError('p_max must be >= 1, got {0}'.format(p_max))
    n_obs = length - p_max
    if n_obs <= n * p_max + 1:
        raise DataError('insufficient observations for an AIC scan up to p={0}: '
                        'L={1}, N={2}'.format(p_max, length, n))

    y = data[:, p_max:].T
    values = []
    for p in range(1, p_max + 1):
        x = lagged_design(data, p, p_max, length)
        try:
            _, resid = least_squares(x, y)
        except EstimationError as exc:
            log.warning('AIC scan: VAR({0}) not estimable ({1})'.format(p, exc))
            values.append(np.inf)
            continue
        sigma = resid.T.dot(resid) / n_obs
        values.append(_logdet(sigma) + 2. * p * n ** 2 / n_obs)
        if varcast.DEBUG:
            log.debug('AIC({0}) = {1}'.format(p, values[-1]))
    return AicScan(values, n_obs)


def _lagged_residuals(resid, lags):
    """ [e_{t-1}, ..., e_{t-lags}] with e_t = 0 for t <= 0; resid is T x N. """
    t, n = resid.shape
    out = np.zeros((t, n * lags))
    for j in range(1, lags + 1):
        out[j:, (j - 1) * n:j * n] = resid[:t - j]
    return out


def _auxiliary_regressions(model, h):
    """ Yield (xi, Sigma_e, Sigma_v, T) of the Breusch-Godfrey auxiliary regressions. """
    if model.residuals is None or model.endog is None:
        raise DataError('residual tests need a model fitted in-process')
    if h < 1:
        raise DataError('error-model lag h must be >= 1, got {0}'.format(h))
    resid = model.residuals.T
    t = resid.shape[0]
    x = lagged_design(model.endog, model.p)
    sigma_e = resid.T.dot(resid) / t
    for xi in range(1, h + 1):
        aux = np.hstack([x, _lagged_residuals(resid, xi)])
        if aux.shape[1] >= t:
            raise EstimationError('auxiliary regression with lag {0} has more regressors '
                                  'than observations'.format(xi))
        _, v = least_squares(aux, resid, model.names)
        yield xi, sigma_e, v.T.dot(v) / t, t


def lm_test(model, h=DEFAULT_LM_H, alpha=DEFAULT_ALPHA):
    """ Breusch-Godfrey LM test for residual autocorrelation, xi = 1..h.

    Q_LM(xi) = T (N - tr(Sigma_e^-1 Sigma_v)) ~ chi2(xi N^2).

    """
    n = model.n_vars
    results = []
    for xi, sigma_e, sigma_v, t in _auxiliary_regressions(model, h):
        try:
            stat = t * (n - np.trace(np.linalg.solve(sigma_e, sigma_v)))
        except np.linalg.LinAlgError:
            raise EstimationError('singular residual covariance in LM test')
        df = xi * n ** 2
        results.append(TestResult('lm', stat, tail_probability('chi2', max(stat, 0.), df),
                                  (df,), alpha, xi=xi))
    return results


def es_test(model, h=DEFAULT_LM_H, alpha=DEFAULT_ALPHA):
    """ Edgerton-Shukur (Rao F) small-sample variant of the LM test, xi = 1..h.

    With m = N xi lagged residual regressors and k = 1 + N p original ones,
    beta = T - k - m - (N - m + 1) / 2 is the effective sample and the
    statistic is referred to F(xi N^2, beta s - q).

    """
    n = model.n_vars
    k = 1 + n * model.p
    results = []
    for xi, sigma_e, sigma_v, t in _auxiliary_regressions(model, h):
        ratio = np.exp(_logdet(sigma_v) - _logdet(sigma_e))
        if not np.isfinite(ratio) or ratio <= 0:
            raise EstimationError('degenerate residual covariance in ES test')
        m = n * xi
        df1 = n * m
        num = n ** 2 * m ** 2 - 4.
        den = n ** 2 + m ** 2 - 5.
        s = np.sqrt(num / den) if num > 0 and den > 0 else 1.
        q = 0.5 * n * m - 1.
        beta = t - k - m - 0.5 * (n - m + 1)
        df2 = beta * s - q
        if df2 <= 0:
            raise NumericalError('ES denominator degrees of freedom {0} <= 0'.format(df2))
        stat = (ratio ** (-1. / s) - 1.) * df2 / df1
        results.append(TestResult('es', stat, tail_probability('f', max(stat, 0.), df1, df2),
                                  (df1, df2), alpha, xi=xi))
    return results


def _ols_tstat(x, y, col):
    """ OLS t-ratio of coefficient `col'. """
    q, r = np.linalg.qr(x)
    if np.min(np.abs(np.diag(r))) <= 1e-12 * max(np.max(np.abs(np.diag(r))), 1.):
        raise EstimationError('singular ADF regression')
    beta = np.linalg.solve(r, q.T.dot(y))
    resid = y - x.dot(beta)
    dof = x.shape[0] - x.shape[1]
    s2 = resid.dot(resid) / dof
    r_inv = np.linalg.inv(r)
    var = s2 * r_inv[col].dot(r_inv[col])
    return beta[col] / np.sqrt(var)


def _check_adf_spec(spec):
    if spec not in ADF_SPECS:
        raise DataError('unknown ADF deterministic terms {0}, valid: {1}'.format(
            spec, ', '.join(ADF_SPECS)))


def adf_p_value(stat, spec='c'):
    """ MacKinnon approximate p-value of an ADF t-statistic, clamped to [0.001, 0.999]. """
    _check_adf_spec(spec)
    p = float(mackinnonp(stat, regression=spec, N=1))
    return min(max(p, ADF_P_FLOOR), ADF_P_CEIL)


def adf_test(series, p, spec='c', alpha=DEFAULT_ALPHA, name=None):
    """ Augmented Dickey-Fuller test.

    Regresses dy_t on a constant (and trend for spec `ct'), y_{t-1} and
    p lagged differences; the statistic is the t-ratio of y_{t-1}.

    """
    _check_adf_spec(spec)
    y = np.asarray(series, dtype=np.float64).reshape(-1)
    if p < 0:
        raise DataError('ADF lag must be >= 0, got {0}'.format(p))
    if len(y) <= p + 10:
        raise DataError('ADF with lag {0} needs more than {1} samples, got {2}'.format(p, p + 10,
                                                                                      len(y)))
    if np.ptp(y) == 0:
        raise DataError('constant series{0} has no unit-root test'.format(
            ' ' + name if name else ''))

    dy = np.diff(y)
    nobs = len(dy) - p
    cols = [np.ones(nobs)]
    if spec == 'ct':
        cols.append(np.arange(1., nobs + 1))
    cols.append(y[p:-1])
    for k in range(1, p + 1):
        cols.append(dy[p - k:len(dy) - k])
    x = np.column_stack(cols)
    theta_col = 2 if spec == 'ct' else 1

    stat = _ols_tstat(x, dy[p:], theta_col)
    return TestResult('adf', stat, adf_p_value(stat, spec), (nobs,), alpha,
                      lag=p, spec=spec, critical=adf_critical_values(nobs, spec))


def adf_critical_values(nobs, spec='c'):
    """ 1%, 5% and 10% ADF critical values for `nobs' regression observations. """
    _check_adf_spec(spec)
    if nobs < 1:
        raise DataError('nobs must be >= 1, got {0}'.format(nobs))
    crit = mackinnoncrit(N=1, regression=spec, nobs=nobs)
    return dict((level, float(c)) for level, c in zip(ADF_LEVELS, crit))


def cusum_test(model, boundary=CUSUM_BOUNDARY):
    """ OLS-CUSUM processes of the VAR residuals, one per variable.

    path(k) = sum_{t <= k} e_t / (sigma sqrt(T)), with a leading 0 at
    normalized time 0.

    """
    if model.residuals is None:
        raise DataError('CUSUM needs a model with residuals')
    paths = []
    for name, e in zip(model.names, model.residuals):
        t = len(e)
        if not np.any(e):
            log.warning('CUSUM: all-zero residuals for {0}'.format(name))
            paths.append(CusumPath(name, np.zeros(t + 1), boundary))
            continue
        if np.std(e) == 0:
            raise NumericalError('zero residual variance for {0}'.format(name))
        sigma = np.sqrt(np.mean(e ** 2))
        path = np.concatenate([[0.], np.cumsum(e)]) / (sigma * np.sqrt(t))
        paths.append(CusumPath(name, path, boundary))
    return paths


def run_diagnostics(frame, p_max=DEFAULT_P_MAX, h=DEFAULT_LM_H, adf_spec='c',
                    adf_lag=None, p=None, alpha=DEFAULT_ALPHA):
    """ AIC scan, LM/ES tables for the two best lags, ADF per variable,
    stability and CUSUM of the selected model.

    `p' overrides the AIC choice for the stability/CUSUM model.

    """
    scan = aic_scan(frame, p_max)
    ranked = scan.ranked()
    lags = ranked[:2]
    log.info('AIC minimizer: p={0} (runner-up {1})'.format(scan.best_p,
                                                           lags[1] if len(lags) > 1 else None))
    p = scan.best_p if p is None else p
    if p not in lags:
        lags.append(p)

    models = dict((lag, fit_var(frame, lag)) for lag in lags)
    lm, es = {}, {}
    for lag, model in models.items():
        lm[lag] = lm_test(model, h, alpha)
        es[lag] = es_test(model, h, alpha)

    adf_lag = p if adf_lag is None else adf_lag
    adf = {}
    for name, series in zip(frame.names, frame.data):
        adf[name] = adf_test(series, adf_lag, adf_spec, alpha, name=name)
        if not adf[name].rejected:
            log.warning('ADF does not reject a unit root for {0} (p={1:.4g})'.format(
                name, adf[name].p_value))

    model = models[p]
    cm = companion(model)
    if not is_stable(cm):
        log.warning('VAR({0}) is not stable, max modulus {1:.4f}'.format(p, cm.max_modulus))
    return DiagnosticReport(scan, lm, es, adf, cusum_test(model), cm, p, adf_spec, adf_lag)
