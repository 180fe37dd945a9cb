# -*- coding: utf-8 -*-

""" Orthogonal impulse responses of a fitted VAR with bootstrap bands. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging

from concurrent import futures

import numpy as np

import varcast
from varcast.exceptions import (ConfigError, DataError, NumericalError,
                                VarcastError)
from varcast.ingest import CANONICAL_NAMES
from varcast.varmodel import companion, fit_var, is_stable, simulate_var

DEFAULT_HORIZON = 25
DEFAULT_REPS = 200
MIN_REPS = 100
# Bootstrap aborts above this share of failed replicates.
MAX_FAILURE_RATE = 0.1
SYMMETRY_TOL = 1e-10
BAND_QUANTILES = (2.5, 97.5)
CSV_HEADER = ['impulse_var', 'response_var', 'horizon', 'theta', 'lo95', 'hi95']

log = logging.getLogger(__name__)


class ImpulseResponseSet(object):
    """ Theta_0..Theta_H, entry [i, j, k] is the response of variable j to
    a one standard deviation orthogonal shock in variable k, i periods earlier.

    Args:
        theta: (H + 1) x N x N array
        ordering: variable names in Cholesky order
        names: variable names, in the order of theta's axes
        lower/upper: optional 95% bands, same shape as theta
        reps/failures: bootstrap bookkeeping

    """
    def __init__(self, theta, ordering, names, lower=None, upper=None, reps=0, failures=0):
        self.theta = theta
        self.ordering = list(ordering)
        self.names = list(names)
        self.lower = lower
        self.upper = upper
        self.reps = reps
        self.failures = failures

    @property
    def horizon(self):
        return self.theta.shape[0] - 1

    @property
    def has_bands(self):
        return self.lower is not None

    def response(self, impulse, response):
        """ Response path of `response' to a shock in `impulse' (names). """
        return self.theta[:, self.names.index(response), self.names.index(impulse)]

    def to_rows(self):
        """ Plot-data rows (impulse_var, response_var, horizon, theta, lo95, hi95).

        Band cells are None when no bootstrap was run.

        """
        for k, impulse in enumerate(self.names):
            for j, response in enumerate(self.names):
                for i in range(self.horizon + 1):
                    lo = hi = None
                    if self.has_bands:
                        lo = float(self.lower[i, j, k])
                        hi = float(self.upper[i, j, k])
                    yield (impulse, response, i, float(self.theta[i, j, k]), lo, hi)

    def __repr__(self):
        return '<ImpulseResponseSet N={0}, H={1}, bands={2}>'.format(len(self.names),
                                                                    self.horizon,
                                                                    self.has_bands)


def cholesky_lower(sigma):
    """ Lower-triangular P with positive diagonal such that P P' = sigma. """
    sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    if sigma.shape[0] != sigma.shape[1]:
        raise NumericalError('covariance must be square, got {0}'.format(sigma.shape))
    scale = max(np.max(np.abs(sigma)), 1.)
    if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL * scale:
        raise NumericalError('covariance matrix is not symmetric')
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NumericalError('residual covariance is not positive definite '
                             '(check the input for constant or collinear columns)')
    if np.any(np.diag(chol) <= 0):
        raise NumericalError('residual covariance is singular')
    return chol


def _ma_recursion(phi, horizon):
    n = phi[0].shape[0]
    out = [np.eye(n)]
    for i in range(1, horizon + 1):
        acc = np.zeros((n, n))
        for k in range(1, min(i, len(phi)) + 1):
            acc += phi[k - 1].dot(out[i - k])
        out.append(acc)
    return out


def _check(model, horizon):
    if horizon < 0:
        raise DataError('horizon must be >= 0, got {0}'.format(horizon))
    cm = companion(model)
    if not is_stable(cm):
        log.warning('VAR is not stable (max modulus {0:.4f}), responses may '
                    'diverge'.format(cm.max_modulus))


def ma_coefficients(model, horizon=DEFAULT_HORIZON):
    """ Reduced-form MA matrices Phi_0 = I, Phi_i = sum_k Phi_k Phi_{i-k}. """
    _check(model, horizon)
    return _ma_recursion(model.phi, horizon)


def default_ordering(names):
    """ Canonical metrics first in MOS, BW, RTT, Jitter, Buffer, SNR order,
    then the remaining variables as given. """
    known = [n for n in CANONICAL_NAMES if n in names]
    return known + [n for n in names if n not in known]


def _permutation(names, ordering):
    if ordering is None:
        ordering = default_ordering(names)
    ordering = list(ordering)
    if sorted(ordering) != sorted(names):
        raise ConfigError('ordering {0} is not a permutation of {1}'.format(ordering, names))
    return ordering, np.array([names.index(n) for n in ordering])


def _impact(sigma, idx):
    """ Cholesky factor of the permuted covariance, mapped back to the original basis. """
    chol = cholesky_lower(sigma[np.ix_(idx, idx)])
    impact = np.empty_like(chol)
    impact[np.ix_(idx, idx)] = chol
    return impact


def _theta(phi, sigma, horizon, idx):
    impact = _impact(sigma, idx)
    return np.array([m.dot(impact) for m in _ma_recursion(phi, horizon)])


def orthogonal_irf(model, horizon=DEFAULT_HORIZON, ordering=None):
    """ Theta_i = Phi_i P where P is the Cholesky factor of the residual
    covariance under `ordering' (list of variable names).

    Theta_0 = P, lower-triangular once rows and columns follow `ordering'.

    """
    ordering, idx = _permutation(model.names, ordering)
    _check(model, horizon)
    theta = _theta(model.phi, model.sigma, horizon, idx)
    return ImpulseResponseSet(theta, ordering, model.names)


def simulate_impulse(model, horizon, shock):
    """ Noiseless response y_0 = shock, y_t = sum_k Phi_k y_{t-k}, N x (H + 1). """
    n, p = model.n_vars, model.p
    y = np.zeros((n, p + horizon + 1))
    y[:, p] = np.asarray(shock, dtype=np.float64).reshape(n)
    for t in range(p + 1, p + horizon + 1):
        for k in range(p):
            y[:, t] += model.phi[k].dot(y[:, t - 1 - k])
    return y[:, p:]


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


class _Replicate(object):
    """ One residual-based recursive bootstrap draw. """
    def __init__(self, model, horizon, idx):
        self.model = model
        self.horizon = horizon
        self.idx = idx
        resid = model.residuals
        self.resid = resid - resid.mean(axis=1)[:, np.newaxis]
        self.initial = model.endog[:, :model.p]
        self.length = model.endog.shape[1] - model.p

    def __call__(self, seed_seq):
        rng = np.random.default_rng(seed_seq)
        draw = rng.integers(0, self.resid.shape[1], size=self.length)
        sim = simulate_var(self.model.c, self.model.phi, self.model.sigma, self.length, rng,
                           burn=0, initial=self.initial, innovations=self.resid[:, draw])
        series = np.hstack([self.initial, sim])
        try:
            refit = fit_var(series, self.model.p)
            return _theta(refit.phi, refit.sigma, self.horizon, self.idx)
        except VarcastError as exc:
            if varcast.DEBUG:
                log.debug('bootstrap replicate failed: {0}'.format(exc))
            return None


def bootstrap_bands(model, horizon=DEFAULT_HORIZON, reps=DEFAULT_REPS, seed=None,
                    ordering=None, allow_degenerate=False, workers=None):
    """ Point OIRF with pointwise 2.5%/97.5% residual-bootstrap bands.

    Args:
        model: VarModel fitted in-process (its estimation sample is resampled)
        horizon: last period H
        reps: number of replicates, at least 100 unless `allow_degenerate'
        seed: int or numpy SeedSequence, each replicate gets its own child stream
        ordering: Cholesky ordering (variable names)
        workers: thread pool size, None lets concurrent.futures decide

    Bands are widened where needed so that they contain the point estimate.

    """
    if model.endog is None or model.residuals is None:
        raise DataError('bootstrap needs a model fitted in-process')
    if reps < 1 or (reps < MIN_REPS and not allow_degenerate):
        raise ConfigError('bootstrap needs at least {0} replicates, got {1}'.format(MIN_REPS,
                                                                                  reps))
    point = orthogonal_irf(model, horizon, ordering)
    _, idx = _permutation(model.names, point.ordering)

    children = _seed_sequence(seed).spawn(reps)
    replicate = _Replicate(model, horizon, idx)
    with futures.ThreadPoolExecutor(max_workers=workers) as executor:
        draws = list(executor.map(replicate, children))

    kept = [d for d in draws if d is not None]
    failures = reps - len(kept)
    if failures:
        log.warning('{0}/{1} bootstrap replicates failed'.format(failures, reps))
    if not kept or failures > MAX_FAILURE_RATE * reps:
        raise NumericalError('{0} of {1} bootstrap replicates failed'.format(failures, reps))

    lower, upper = np.percentile(np.array(kept), BAND_QUANTILES, axis=0)
    lower = np.minimum(lower, point.theta)
    upper = np.maximum(upper, point.theta)
    log.info('bootstrap bands from {0} replicates'.format(len(kept)))
    return ImpulseResponseSet(point.theta, point.ordering, point.names, lower, upper,
                              reps=reps, failures=failures)
