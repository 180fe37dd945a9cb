# -*- coding: utf-8 -*-

""" VAR(p) estimation by per-equation OLS, stability and forecasting. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging

import numpy as np
import scipy.linalg
import simplejson as json

import varcast
from varcast.exceptions import DataError, EstimationError, NumericalError
from varcast.ingest import MetricFrame

# Two-sided 95% normal quantile used for every forecast interval.
Z95 = 1.96
# Relative tolerance on the R diagonal of the QR decomposition.
RANK_TOL = 1e-10
MODEL_FORMAT_VERSION = 1

log = logging.getLogger(__name__)


class VarModel(object):
    """ Fitted VAR(p): y_t = c + Phi_1 y_{t-1} + ... + Phi_p y_{t-p} + e_t.

    Args:
        c: intercept, length N
        phi: sequence of p N x N matrices
        sigma: N x N residual covariance
        residuals: N x (L - p) residual matrix, None for loaded models
        n_obs: sample count the residual covariance divides by (L)
        names: variable labels
        endog: N x L estimation sample, kept for bootstrap resampling

    """
    def __init__(self, c, phi, sigma, residuals=None, n_obs=None, names=None,
                 endog=None):
        self.c = np.asarray(c, dtype=np.float64).reshape(-1)
        self.phi = [np.asarray(m, dtype=np.float64) for m in phi]
        if not self.phi:
            raise EstimationError('a VAR needs at least one lag')
        self.sigma = np.asarray(sigma, dtype=np.float64)
        self.residuals = residuals
        self.n_obs = n_obs
        n = len(self.c)
        if names is None:
            names = ['y{0}'.format(i + 1) for i in range(n)]
        self.names = list(names)
        self.endog = endog
        for m in self.phi:
            if m.shape != (n, n):
                raise EstimationError('coefficient matrix of shape {0}, expected {1}'.format(m.shape,
                                                                                           (n, n)))
        if self.sigma.shape != (n, n):
            raise EstimationError('covariance of shape {0}, expected {1}'.format(self.sigma.shape,
                                                                                (n, n)))

    @property
    def p(self):
        return len(self.phi)

    @property
    def n_vars(self):
        return len(self.c)

    @property
    def std(self):
        """ Residual standard deviation per variable. """
        return np.sqrt(np.diag(self.sigma))

    def coef_matrix(self):
        """ (1 + N p) x N stacked coefficients, matching `lagged_design' columns. """
        return np.vstack([self.c[np.newaxis, :]] + [m.T for m in self.phi])

    def predict_next(self, lags):
        """ One-step prediction from the p most recent observations.

        `lags' is N x p, oldest first (its last column is y_T).

        """
        y = self.c.copy()
        for k, m in enumerate(self.phi):
            y += m.dot(lags[:, -1 - k])
        return y

    def __repr__(self):
        return '<VarModel N={0}, p={1}>'.format(self.n_vars, self.p)


class CompanionMatrix(object):
    """ Np x Np VAR(1) form of a VAR(p) and the moduli of its eigenvalues. """
    def __init__(self, m, eigen_moduli, eigenvalues=None):
        self.m = m
        self.eigen_moduli = eigen_moduli
        self.eigenvalues = eigenvalues

    @property
    def max_modulus(self):
        return float(self.eigen_moduli[0])

    def __repr__(self):
        return '<CompanionMatrix {0}x{0}, max modulus {1:.4f}>'.format(self.m.shape[0],
                                                                      self.max_modulus)


class ForecastResult(object):
    """ Point forecasts (N x H) with 95% interval half-widths. """
    def __init__(self, point, half_width, horizon, names=None):
        self.point = point
        self.half_width = half_width
        self.horizon = horizon
        self.names = names

    @property
    def lower(self):
        return self.point - self.half_width[:, np.newaxis]

    @property
    def upper(self):
        return self.point + self.half_width[:, np.newaxis]


def _as_array(frame_or_array):
    if isinstance(frame_or_array, MetricFrame):
        return frame_or_array.data
    return np.atleast_2d(np.asarray(frame_or_array, dtype=np.float64))


def lagged_design(data, p, start=None, stop=None):
    """ Regressor rows [1, y_{t-1}', ..., y_{t-p}'] for targets t in [start, stop).

    `start' defaults to p, `stop' to L.

    """
    data = _as_array(data)
    n, length = data.shape
    start = p if start is None else start
    stop = length if stop is None else stop
    if start < p:
        raise DataError('target index {0} has fewer than p={1} lags'.format(start, p))
    rows = stop - start
    x = np.empty((rows, 1 + n * p))
    x[:, 0] = 1.
    for k in range(1, p + 1):
        x[:, 1 + (k - 1) * n:1 + k * n] = data[:, start - k:stop - k].T
    return x


def least_squares(x, y, names=None):
    """ OLS through a QR decomposition of the regressor matrix.

    Returns (coefficients, residuals). A rank-deficient regressor matrix
    raises EstimationError naming the lagged variable responsible.

    """
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    scale = max(diag.max(), 1.)
    deficient = np.flatnonzero(diag <= RANK_TOL * scale)
    if len(deficient):
        col = int(deficient[0])
        variable = None
        if names and col > 0:
            variable = names[(col - 1) % len(names)]
        raise EstimationError('singular regressor cross-product at column {0}'.format(col),
                              variable=variable)
    beta = scipy.linalg.solve_triangular(r, q.T.dot(y))
    return beta, y - x.dot(beta)


def fit_var(frame, p):
    """ Estimate a VAR(p) with intercept, one OLS per equation.

    The residual covariance divides by the frame length L.

    """
    if int(p) != p or p < 1:
        raise DataError('lag order must be a positive integer, got {0}'.format(p))
    p = int(p)
    data = _as_array(frame)
    names = frame.names if isinstance(frame, MetricFrame) else None
    n, length = data.shape
    if length - p <= n * p + 1:
        raise DataError('insufficient observations for VAR({0}) with N={1}: '
                        'L={2}, need L - p > N p + 1'.format(p, n, length))
    for i, series in enumerate(data):
        if np.ptp(series[:length - 1]) == 0:
            raise EstimationError('constant series makes the regressors singular',
                                  variable=names[i] if names else 'y{0}'.format(i + 1))

    x = lagged_design(data, p)
    y = data[:, p:].T
    beta, resid = least_squares(x, y, names)

    c = beta[0]
    phi = [beta[1 + k * n:1 + (k + 1) * n].T for k in range(p)]
    sigma = resid.T.dot(resid) / length
    sigma = (sigma + sigma.T) / 2.

    if varcast.DEBUG:
        log.debug('VAR({0}) fitted on {1} equations'.format(p, len(y)))

    return VarModel(c, phi, sigma, residuals=resid.T, n_obs=length, names=names,
                    endog=data)


def companion(model):
    """ Companion matrix and its eigenvalue moduli, sorted descending. """
    n, p = model.n_vars, model.p
    m = np.zeros((n * p, n * p))
    m[:n, :] = np.hstack(model.phi)
    if p > 1:
        m[n:, :-n] = np.eye(n * (p - 1))
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError('eigenvalue computation failed: {0}'.format(exc))
    order = np.argsort(-np.abs(eig), kind='stable')
    return CompanionMatrix(m, np.abs(eig)[order], eig[order])


def is_stable(cm, tol=1e-9):
    """ True iff every eigenvalue of the companion matrix lies inside the unit circle. """
    return bool(cm.max_modulus < 1. - tol)


def forecast(model, history, h=1):
    """ Recursive h-step forecast from the last p columns of `history'.

    Interval half-widths are 1.96 sigma_e at every horizon.

    """
    if h < 1:
        raise DataError('forecast horizon must be >= 1, got {0}'.format(h))
    data = _as_array(history)
    if data.shape[1] < model.p:
        raise DataError('forecast needs {0} history columns, got {1}'.format(model.p,
                                                                            data.shape[1]))
    lags = data[:, -model.p:].copy()
    point = np.empty((model.n_vars, h))
    for j in range(h):
        point[:, j] = model.predict_next(lags)
        lags = np.hstack([lags[:, 1:], point[:, j:j + 1]])
    return ForecastResult(point, Z95 * model.std, h, names=model.names)


def rolling_one_step(model, frame, split):
    """ One-step predictions over the test segment from true history only.

    `model' is a VarModel or a fitted learner (anything with a
    `rolling_one_step(frame, split)' method). Returns N x test.L.

    """
    if split.test.length < 1:
        raise DataError('empty test segment')
    if not isinstance(model, VarModel):
        return model.rolling_one_step(frame, split)
    if split.split_index < model.p:
        raise DataError('the train segment is shorter than p={0}'.format(model.p))
    x = lagged_design(frame, model.p, split.split_index, frame.length)
    return x.dot(model.coef_matrix()).T


def fitted_values(model):
    """ In-sample one-step predictions, N x (L - p). """
    if model.endog is None:
        raise DataError('model carries no estimation sample')
    return lagged_design(model.endog, model.p).dot(model.coef_matrix()).T


def interval_coverage(actual, predicted, half_width):
    """ Fraction of points inside predicted +/- half_width, per variable. """
    err = np.abs(np.asarray(actual) - np.asarray(predicted))
    return np.mean(err <= np.asarray(half_width)[:, np.newaxis], axis=1)


def simulate_var(c, phi, sigma, length, rng, burn=100, initial=None, innovations=None):
    """ Simulate a VAR with Gaussian (or given) innovations.

    Args:
        c, phi, sigma: process parameters
        length: number of returned samples
        rng: numpy Generator
        burn: leading samples discarded
        initial: N x p start values (zeros by default)
        innovations: optional N x (burn + length) shocks used instead of draws

    """
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    phi = [np.atleast_2d(np.asarray(m, dtype=np.float64)) for m in phi]
    n, p = len(c), len(phi)
    total = burn + length
    if innovations is None:
        chol = np.linalg.cholesky(np.atleast_2d(sigma))
        innovations = chol.dot(rng.standard_normal((n, total)))
    y = np.zeros((n, p + total))
    if initial is not None:
        y[:, :p] = np.asarray(initial).reshape(n, p)
    for t in range(p, p + total):
        y_t = c + innovations[:, t - p]
        for k in range(p):
            y_t = y_t + phi[k].dot(y[:, t - 1 - k])
        y[:, t] = y_t
    return y[:, p + burn:]


def save_model(model, path, extra=None):
    """ Write the model as a JSON document {p, c, phi, sigma, names, n_obs}. """
    doc = {'version': MODEL_FORMAT_VERSION,
           'p': model.p,
           'c': model.c.tolist(),
           'phi': [m.tolist() for m in model.phi],
           'sigma': model.sigma.tolist(),
           'names': model.names,
           'n_obs': model.n_obs}
    if extra:
        doc.update(extra)
    with open(path, 'w') as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2))
    return path


def load_model(path):
    """ Load a model written by `save_model'. """
    try:
        with open(path) as fh:
            doc = json.loads(fh.read())
    except (IOError, OSError, ValueError) as exc:
        raise DataError('cannot read model {0}: {1}'.format(path, exc))
    for key in ('p', 'c', 'phi', 'sigma'):
        if key not in doc:
            raise DataError('model {0} lacks the {1} field'.format(path, key))
    model = VarModel(doc['c'], doc['phi'], doc['sigma'], n_obs=doc.get('n_obs'),
                     names=doc.get('names'))
    if model.p != doc['p']:
        raise DataError('model {0}: p={1} but {2} coefficient matrices'.format(path, doc['p'],
                                                                              model.p))
    return model
