# -*- coding: utf-8 -*-

""" Forecast scoring, technique timing and comparison reports. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging
import os
import time
from datetime import datetime

from concurrent import futures

import numpy as np
import pandas as pd
import simplejson as json

import varcast
from varcast.exceptions import ConfigError, DataError

MIN_TIMING_REPS = 3
PARALLEL_CAVEAT = 'reps ran concurrently, durations include thread contention'
REPORT_CSV_COLUMNS = ['technique', 'variable', 'rmse', 'mae', 'mape', 'mape_coverage']
PLOT_CSV_COLUMNS = ['t', 'variable', 'actual', 'predicted', 'lo95', 'hi95']

log = logging.getLogger(__name__)


class Score(object):
    """ RMSE, MAE and MAPE (percent) of one variable.

    `mape' skips points whose actual value is 0, `mape_count' is the
    number of points it was computed on (`mape' is None when 0).

    """
    def __init__(self, rmse, mae, mape, mape_count, n):
        self.rmse = rmse
        self.mae = mae
        self.mape = mape
        self.mape_count = mape_count
        self.n = n

    @property
    def mape_coverage(self):
        return self.mape_count / float(self.n)

    def to_dict(self):
        return {'rmse': self.rmse, 'mae': self.mae, 'mape': self.mape,
                'mape_coverage': self.mape_coverage}

    def __repr__(self):
        return '<Score rmse={0:.4g}, mae={1:.4g}, mape={2}>'.format(self.rmse, self.mae,
                                                                   self.mape)


class TimingSummary(object):
    """ Wall-clock durations of repeated runs and their quartiles.

    Quartiles use linear interpolation between order statistics.

    """
    def __init__(self, durations, parallel=False, result=None):
        self.durations = list(durations)
        self.parallel = parallel
        self.result = result
        self.q1, self.median, self.q3 = [float(q) for q in
                                         np.percentile(self.durations, [25, 50, 75])]

    @property
    def iqr(self):
        return self.q3 - self.q1

    def to_dict(self):
        d = {'median': self.median, 'q1': self.q1, 'q3': self.q3, 'iqr': self.iqr,
             'reps': len(self.durations)}
        if self.parallel:
            d['parallel'] = True
            d['caveat'] = PARALLEL_CAVEAT
        return d

    def __repr__(self):
        return '<TimingSummary median={0:.4g}s, iqr={1:.4g}s>'.format(self.median, self.iqr)


class ScoreCard(object):
    """ Scores of one technique over every variable, with optional timing. """
    def __init__(self, technique, scores, window=None, seed=None, timing=None, params=None):
        self.technique = technique
        self.scores = scores
        self.window = window
        self.seed = seed
        self.timing = timing
        self.params = params or {}

    def to_dict(self):
        return {'name': self.technique,
                'window': self.window,
                'seed': self.seed,
                'params': self.params,
                'metrics': dict((name, s.to_dict()) for name, s in self.scores.items()),
                'timing': self.timing.to_dict() if self.timing else None}

    def __repr__(self):
        return '<ScoreCard {0}>'.format(self.technique)


def score(actual, predicted, names=None):
    """ Per-variable RMSE, MAE and MAPE of N x T forecasts.

    Returns an ordered {name: Score} dict.

    """
    actual = np.atleast_2d(np.asarray(actual, dtype=np.float64))
    predicted = np.atleast_2d(np.asarray(predicted, dtype=np.float64))
    if actual.shape != predicted.shape:
        raise DataError('actual {0} and predicted {1} shapes differ'.format(actual.shape,
                                                                           predicted.shape))
    if actual.shape[1] < 1:
        raise DataError('nothing to score')
    if names is None:
        names = ['y{0}'.format(i + 1) for i in range(actual.shape[0])]

    scores = {}
    for name, a, f in zip(names, actual, predicted):
        err = a - f
        rmse = float(np.sqrt(np.mean(err ** 2)))
        mae = float(np.mean(np.abs(err)))
        nonzero = a != 0
        count = int(nonzero.sum())
        if count < len(a):
            log.warning('{0}: {1} zero actual value(s) skipped by MAPE'.format(name,
                                                                             len(a) - count))
        mape = None
        if count:
            mape = float(100. * np.mean(np.abs(err[nonzero] / a[nonzero])))
        scores[name] = Score(rmse, mae, mape, count, len(a))
    return scores


def time_technique(task, reps=5, parallel=False, workers=None):
    """ Run `task' `reps' times and summarize the wall-clock durations.

    The last run's return value is kept in `result'. If a run raises, the
    durations measured so far are logged and attached to the exception as
    `partial_timings'.

    """
    if reps < MIN_TIMING_REPS:
        raise ConfigError('timing needs at least {0} repetitions, got {1}'.format(MIN_TIMING_REPS,
                                                                                reps))

    def timed(_):
        start = time.perf_counter()
        out = task()
        return time.perf_counter() - start, out

    durations, result = [], None
    try:
        if parallel:
            with futures.ThreadPoolExecutor(max_workers=workers) as executor:
                for duration, result in executor.map(timed, range(reps)):
                    durations.append(duration)
        else:
            for i in range(reps):
                duration, result = timed(i)
                durations.append(duration)
                if varcast.DEBUG:
                    log.debug('rep {0}: {1:.6f}s'.format(i + 1, duration))
    except Exception as exc:
        log.error('timing aborted after {0} run(s): {1}'.format(len(durations), durations))
        exc.partial_timings = durations
        raise
    return TimingSummary(durations, parallel, result)


def best_by_mape(scorecards):
    """ {variable: (technique, tied techniques)} minimizing MAPE.

    Ties go to the lexicographically first technique name.

    """
    best = {}
    names = []
    for card in scorecards:
        for name in card.scores:
            if name not in names:
                names.append(name)
    for name in names:
        cells = sorted((card.scores[name].mape, card.technique) for card in scorecards
                       if name in card.scores and card.scores[name].mape is not None)
        if not cells:
            best[name] = (None, [])
            continue
        top = cells[0][0]
        tied = [t for m, t in cells if m == top]
        best[name] = (tied[0], tied)
    return best


def build_report(scorecards, diagnostics=None, metadata=None):
    """ Assemble the comparison document.

    Args:
        scorecards: list of ScoreCard, at least one
        diagnostics: optional DiagnosticReport (or its dict)
        metadata: flow_id, codec, config hash, ... merged at the top level

    """
    if not scorecards:
        raise DataError('a report needs at least one scored technique')
    best = best_by_mape(scorecards)
    report = {'techniques': [c.to_dict() for c in scorecards],
              'best_by_mape': dict((name, t) for name, (t, _) in best.items()),
              'flow_id': None,
              'codec': None}
    ties = dict((name, tied) for name, (_, tied) in best.items() if len(tied) > 1)
    if ties:
        report['mape_ties'] = ties
        for name, tied in ties.items():
            log.info('MAPE tie on {0} between {1}, marking {2}'.format(name, ', '.join(tied),
                                                                      tied[0]))
    if diagnostics is not None:
        report['diagnostics'] = (diagnostics.to_dict() if hasattr(diagnostics, 'to_dict')
                                 else diagnostics)
    if metadata:
        report.update(metadata)
    return report


def _utc_iso(dt):
    return dt.isoformat() + 'Z'


def _makedirs(path):
    if not os.path.isdir(path):
        os.makedirs(path)


def write_csv_table(df, path, config_hash=None):
    """ CSV with a leading `# config_hash' comment line. """
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        if config_hash:
            fh.write('# config_hash: {0}\n'.format(config_hash))
        df.to_csv(fh, index=False, float_format='%.17g', lineterminator='\n')
    return path


def write_json(doc, path):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2, ignore_nan=True))
        fh.write('\n')
    return path


def write_meta(paths, out_dir, stem, config_hash=None, extra=None, now=None):
    """ Timestamped sidecar, kept apart so the main outputs stay byte-identical. """
    now = now or datetime.utcnow()
    meta = {'created': _utc_iso(now),
            'varcast_version': varcast.__version__,
            'config_hash': config_hash,
            'files': sorted(os.path.basename(p) for p in paths)}
    if extra:
        meta.update(extra)
    return write_json(meta, os.path.join(out_dir, '{0}.meta.json'.format(stem)))


def report_table(report):
    """ One row per (technique, variable). """
    rows = []
    for tech in report['techniques']:
        for name in sorted(tech['metrics']):
            m = tech['metrics'][name]
            rows.append([tech['name'], name, m['rmse'], m['mae'], m['mape'], m['mape_coverage']])
    return pd.DataFrame(rows, columns=REPORT_CSV_COLUMNS)


def split_timings(report, sidecar):
    """ Copy of `report' without wall-clock durations, and the durations by technique.

    Each timed technique keeps its rep count, the parallel flag and caveat,
    and the name of the `sidecar' file holding its quartiles.

    """
    stable = dict(report)
    stable['techniques'] = []
    timings = {}
    for tech in report.get('techniques', []):
        tech = dict(tech)
        timing = tech.get('timing')
        if timing:
            timings[tech['name']] = timing
            tech['timing'] = dict((k, timing[k]) for k in ('reps', 'parallel', 'caveat')
                                  if k in timing)
            tech['timing']['file'] = sidecar
        stable['techniques'].append(tech)
    return stable, timings


def write_report(report, out_dir, stem='report', now=None):
    """ Write `<stem>.json', `<stem>.csv' and the `<stem>.meta.json' sidecar.

    Timing quartiles go to the sidecar with the creation time, so two runs
    with the same settings give byte-identical `<stem>.json' files.
    Returns the written paths.

    """
    _makedirs(out_dir)
    config_hash = report.get('config_hash')
    sidecar = '{0}.meta.json'.format(stem)
    stable, timings = split_timings(report, sidecar)
    paths = [write_json(stable, os.path.join(out_dir, '{0}.json'.format(stem)))]
    if report.get('techniques'):
        paths.append(write_csv_table(report_table(report),
                                     os.path.join(out_dir, '{0}.csv'.format(stem)),
                                     config_hash))
    paths.append(write_meta(paths, out_dir, stem, config_hash,
                            extra={'timing': timings} if timings else None, now=now))
    log.info('Report written to {0}'.format(paths[0]))
    return paths


def write_plot_data(out_dir, technique, names, actual, predicted, start=0, lower=None,
                    upper=None, config_hash=None, stem='plot'):
    """ Actual vs predicted CSV in long format, band columns empty when absent.

    `start' is the time index of the first column.

    """
    _makedirs(out_dir)
    actual = np.atleast_2d(actual)
    predicted = np.atleast_2d(predicted)
    t = np.arange(start, start + actual.shape[1])
    parts = []
    for j, name in enumerate(names):
        part = pd.DataFrame({'t': t, 'variable': name, 'actual': actual[j],
                             'predicted': predicted[j],
                             'lo95': lower[j] if lower is not None else np.nan,
                             'hi95': upper[j] if upper is not None else np.nan})
        parts.append(part[PLOT_CSV_COLUMNS])
    path = os.path.join(out_dir, '{0}-{1}.csv'.format(stem, technique))
    return write_csv_table(pd.concat(parts, ignore_index=True), path, config_hash)
