# -*- coding: utf-8 -*-

""" Load VoIP metric traces, derive secondary metrics and split them. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging
import os

import numpy as np
import pandas as pd
import requests

import varcast
from varcast.exceptions import ConfigError, DataError, DomainError

# Canonical variables, in the order used for Cholesky orderings.
CANONICAL_NAMES = ['mos', 'bw', 'rtt', 'jitter', 'buffer', 'snr']
DEFAULT_UNITS = {'mos': '', 'bw': 'kb/s', 'rtt': 'ms',
                 'jitter': 'ms', 'buffer': 'ms', 'snr': 'dB'}
MISSING_POLICIES = ('reject', 'interpolate')
MISSING_TOKENS = frozenset(['', 'nan', 'NaN', 'NA', 'N/A', 'null', 'None'])
SAMPLE_PERIOD_COLUMN = 'sample_period'
TRAIN_FRACTION_NUM = 7
TRAIN_FRACTION_DEN = 10
MIN_SPLIT_LENGTH = 10

log = logging.getLogger(__name__)


class MetricFrame(object):
    """ N aligned time series (rows) of L samples (columns).

    Args:
        names: variable labels
        units: unit strings, one per variable
        data: N x L array-like, a 1-d input is treated as a single variable
        sample_period: seconds per sample

    The data array is copied and made read-only.

    """
    def __init__(self, names, units, data, sample_period=1.0):
        data = np.array(data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DataError('a MetricFrame needs N >= 1 rows and L >= 1 columns, '
                            'got shape {0}'.format(data.shape))
        names = list(names)
        units = list(units)
        if len(names) != data.shape[0] or len(units) != data.shape[0]:
            raise DataError('{0} names and {1} units for {2} variables'.format(len(names),
                                                                              len(units),
                                                                              data.shape[0]))
        if len(set(names)) != len(names):
            raise DataError('duplicate variable names: {0}'.format(names))
        if not np.all(np.isfinite(data)):
            raise DataError('non-finite values in MetricFrame')
        if not sample_period > 0:
            raise DataError('sample_period must be positive, got {0}'.format(sample_period))
        data.setflags(write=False)
        self.names = names
        self.units = units
        self.data = data
        self.sample_period = float(sample_period)

    @property
    def n_vars(self):
        return self.data.shape[0]

    @property
    def length(self):
        return self.data.shape[1]

    def column(self, t):
        """ Observation vector y_t. """
        return self.data[:, t]

    def row(self, name):
        """ Single series by variable name. """
        try:
            return self.data[self.names.index(name)]
        except ValueError:
            raise DataError('unknown variable {0}, frame has {1}'.format(name, self.names))

    def subframe(self, start=None, stop=None):
        """ Contiguous slice of time samples, same variables. """
        return MetricFrame(self.names, self.units, self.data[:, start:stop],
                           self.sample_period)

    def reorder(self, names):
        """ Same frame with variables permuted to `names'. """
        if sorted(names) != sorted(self.names):
            raise ConfigError('ordering {0} is not a permutation of {1}'.format(names,
                                                                             self.names))
        idx = [self.names.index(n) for n in names]
        return MetricFrame(names, [self.units[i] for i in idx], self.data[idx],
                           self.sample_period)

    def __eq__(self, other):
        return (isinstance(other, MetricFrame) and self.names == other.names and
                self.units == other.units and
                self.sample_period == other.sample_period and
                np.array_equal(self.data, other.data))

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return '<MetricFrame N={0}, L={1}: {2}>'.format(self.n_vars, self.length,
                                                        ','.join(self.names))


class SplitFrame(object):
    """ Contiguous train prefix / test suffix of a MetricFrame. """
    def __init__(self, train, test, split_index):
        self.train = train
        self.test = test
        self.split_index = split_index

    def __repr__(self):
        return '<SplitFrame train={0}, test={1}>'.format(self.train.length,
                                                          self.test.length)


def frame_from_array(data, names=None, units=None, sample_period=1.0):
    """ Build a MetricFrame with default labels y1..yN and empty units. """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if names is None:
        names = ['y{0}'.format(i + 1) for i in range(data.shape[0])]
    if units is None:
        units = [DEFAULT_UNITS.get(n, '') for n in names]
    return MetricFrame(names, units, data, sample_period)


def parse_schema(schema):
    """ Parse a column mapping.

    Accepts "mos,bw:kb/s,rtt" strings or a sequence of names / (name, unit)
    pairs, returns a list of (name, unit) tuples. Units default to the
    canonical ones.

    """
    if isinstance(schema, str):
        schema = [s.strip() for s in schema.split(',') if s.strip()]
    entries = []
    for entry in schema:
        if isinstance(entry, (tuple, list)):
            name, unit = entry
        elif ':' in entry:
            name, unit = entry.split(':', 1)
        else:
            name, unit = entry, DEFAULT_UNITS.get(entry, '')
        entries.append((name.strip(), unit.strip()))
    if not entries:
        raise ConfigError('column mapping names no column')
    return entries


def _repair(values, missing, name, path):
    """ Linear interpolation between temporal neighbours, endpoints copy the nearest value. """
    idx = np.arange(len(values))
    valid = ~missing
    if not valid.any():
        raise DataError('column {0} of {1} has no usable value'.format(name, path))
    repaired = values.copy()
    repaired[missing] = np.interp(idx[missing], idx[valid], values[valid])
    return repaired


def load_csv(path, schema, missing='reject'):
    """ Load a trace from a CSV file with a header row.

    Args:
        path: CSV file path
        schema: column mapping, see `parse_schema'
        missing: `reject' (default) or `interpolate'

    """
    if missing not in MISSING_POLICIES:
        raise ConfigError('unknown missing-value policy {0}, valid: {1}'.format(missing,
                                                                              ', '.join(MISSING_POLICIES)))
    entries = parse_schema(schema)
    if not os.path.isfile(path):
        raise ConfigError('input file not found: {0}'.format(path))
    if os.path.getsize(path) == 0:
        raise ConfigError('input file is empty: {0}'.format(path))

    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError('cannot parse {0}: {1}'.format(path, exc))
    df.columns = [c.strip() for c in df.columns]

    if len(df) < 2:
        raise DataError('{0} has {1} data rows, at least 2 are needed'.format(path, len(df)))

    rows = []
    for name, unit in entries:
        if name not in df.columns:
            raise DataError('column {0} not found in {1} (header: {2})'.format(name, path,
                                                                             list(df.columns)))
        raw = df[name].str.strip()
        is_missing = raw.isin(MISSING_TOKENS).values
        values = pd.to_numeric(raw.where(~raw.isin(MISSING_TOKENS)),
                               errors='coerce').values.astype(np.float64)
        bad = ~np.isfinite(values) & ~is_missing
        if bad.any():
            first = int(np.flatnonzero(bad)[0])
            raise DataError('non-numeric value {0!r} in column {1}, data row {2} of {3}'.format(
                raw.iloc[first], name, first + 1, path))
        if is_missing.any():
            if missing == 'reject':
                first = int(np.flatnonzero(is_missing)[0])
                raise DataError('{0} missing cell(s) in column {1} of {2} (first at data row {3}); '
                                'use the interpolate policy to repair them'.format(
                                    int(is_missing.sum()), name, path, first + 1))
            log.warning('Interpolating {0} missing cell(s) in column {1}'.format(int(is_missing.sum()),
                                                                                 name))
            values = _repair(values, is_missing, name, path)
        rows.append(values)

    sample_period = 1.0
    if SAMPLE_PERIOD_COLUMN in df.columns:
        periods = pd.to_numeric(df[SAMPLE_PERIOD_COLUMN], errors='coerce').dropna()
        if len(periods):
            sample_period = float(periods.median())

    if varcast.DEBUG:
        log.debug('Loaded {0}: {1} variables x {2} samples'.format(path, len(rows), len(df)))

    return MetricFrame([n for n, _ in entries], [u for _, u in entries],
                       np.vstack(rows), sample_period)


def write_csv(frame, path):
    """ Write `frame' with a header row, one time sample per line. """
    df = pd.DataFrame(frame.data.T, columns=frame.names)
    if frame.sample_period != 1.0:
        df[SAMPLE_PERIOD_COLUMN] = frame.sample_period
    df.to_csv(path, index=False, float_format='%.17g', encoding='utf-8')
    return path


def mos_from_r(r):
    """ ITU-T G.107 conversion of an R-factor (0-100) to a MOS (1-4.5).

    The cubic dips slightly below 1 for R < 6.5, it is floored at 1 so
    the mapping is non-decreasing. Works on scalars and arrays.

    """
    arr = np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 100):
        raise DomainError('R-factor must lie in [0, 100], got {0}'.format(r))
    mos = np.maximum(1 + 0.035 * arr + 7e-6 * arr * (arr - 60) * (100 - arr), 1.)
    if mos.ndim == 0:
        return float(mos)
    return mos


def jitter_series(tx_times, rx_times):
    """ Per-packet jitter, in ms, from send/receive timestamps in seconds.

    J_n = |(rx_n - tx_n) - (rx_{n-1} - tx_{n-1})|

    """
    tx = np.asarray(tx_times, dtype=np.float64)
    rx = np.asarray(rx_times, dtype=np.float64)
    if tx.shape != rx.shape or tx.ndim != 1:
        raise DataError('tx and rx timestamps differ in length ({0} vs {1})'.format(tx.shape,
                                                                                  rx.shape))
    if len(tx) < 2:
        raise DataError('jitter needs at least 2 packets, got {0}'.format(len(tx)))
    if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(rx))):
        raise DataError('non-finite timestamps')
    return np.abs(np.diff(rx - tx)) * 1000.


def split_70_30(frame):
    """ Time-ordered 70/30 train/test split, split index floor(0.7 L). """
    if frame.length < MIN_SPLIT_LENGTH:
        raise DataError('splitting needs L >= {0}, got {1}'.format(MIN_SPLIT_LENGTH,
                                                                   frame.length))
    split_index = (TRAIN_FRACTION_NUM * frame.length) // TRAIN_FRACTION_DEN
    return SplitFrame(frame.subframe(None, split_index),
                      frame.subframe(split_index, None),
                      split_index)


def outlier_summary(frame):
    """ Box-plot statistics per variable, outliers lie beyond 1.5 IQR of the quartiles. """
    summary = {}
    for name, series in zip(frame.names, frame.data):
        q1, median, q3 = np.percentile(series, [25, 50, 75])
        iqr = q3 - q1
        lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        summary[name] = {'q1': float(q1), 'median': float(median), 'q3': float(q3),
                         'iqr': float(iqr),
                         'n_outliers': int(np.sum((series < lo) | (series > hi)))}
    return summary


def fetch_trace(url, dest, chunk_size=512 << 10, timeout=60):
    """ Download a published post-processed trace to `dest'.

    If `dest' is a directory, the file name is taken from the URL.
    Returns the written path.

    """
    if os.path.isdir(dest):
        dest = os.path.join(dest, os.path.basename(url.split('?')[0]) or 'trace.csv')
    log.info('Fetching {0}'.format(url))
    try:
        r = requests.get(url, stream=True, timeout=timeout)
    except requests.RequestException as exc:
        raise DataError('cannot fetch {0}: {1}'.format(url, exc))

    if r.status_code == 404:
        raise DataError('trace not found: {0}'.format(url))
    try:
        r.raise_for_status()
    except requests.HTTPError as exc:
        raise DataError('cannot fetch {0}: {1}'.format(url, exc))

    size = 0
    with open(dest, 'wb') as fh:
        for buf in r.iter_content(chunk_size=chunk_size):
            if buf:
                fh.write(buf)
                size += len(buf)

    log.info('{0}: {1} bytes'.format(dest, size))
    return dest
