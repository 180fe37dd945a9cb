# -*- coding: utf-8 -*-
"""varcast command line tool.

Usage:
  varcast diagnose [options] [--out=<dir>] [--verbose]
  varcast fit [options] [--out=<dir>] [--verbose]
  varcast forecast [options] [--out=<dir>] [--verbose]
  varcast oirf [options] [--out=<dir>] [--verbose]
  varcast compare [options] [--out=<dir>] [--verbose]
  varcast fetch <url> [--out=<dir>] [--verbose]
  varcast -h | --help
  varcast --version

Options:
  -h --help               Show this screen.
  --version               Show version.
  --input=<path>          CSV trace with a header row.
  --columns=<spec>        Variables to load, e.g. mos,bw:kb/s,rtt.
  --missing=<policy>      reject or interpolate.
  --config=<path>         JSON config file, overrides ~/.config/varcast/config.json.
  --out=<dir>             Output directory.
  --p=<p>                 VAR lag order, or auto for the AIC minimizer.
  --p-max=<n>             Largest lag order scanned by AIC.
  --lm-h=<n>              Error-model lag of the LM/ES tests.
  --adf-spec=<spec>       ADF deterministic terms: c or ct.
  --adf-lag=<n>           ADF augmentation lag, or auto for the VAR order.
  --model=<path>          Model JSON written by `varcast fit'.
  --horizon=<n>           Forecast or impulse response horizon.
  --ordering=<names>      Cholesky ordering, comma separated.
  --reps=<n>              Bootstrap replicates, 0 disables the bands.
  --allow-degenerate      Accept fewer than 100 bootstrap replicates.
  --learners=<names>      Techniques to compare among var,linear,forest,mlp.
  --window=<w>            Learner window length, or auto for the VAR order.
  --ridge=<penalty>       Ridge penalty of the linear learner.
  --timing-reps=<n>       Timed repetitions per technique, 0 disables timing.
  --parallel-timing       Run the timed repetitions on a thread pool.
  --seed=<seed>           Seed of every random stream.
  --flow-id=<id>          Flow identifier recorded in reports.
  --codec=<codec>         Codec recorded in reports.
  --verbose               Debug output.
"""
import logging
import os
import sys

import numpy as np
import pandas as pd
from docopt import docopt, DocoptExit

import varcast
from varcast import __version__
from varcast.config import AUTO, RunConfig
from varcast.diagnostics import aic_scan, run_diagnostics
from varcast.evaluate import (ScoreCard, build_report, score, time_technique,
                              write_csv_table, write_json, write_meta,
                              write_plot_data, write_report)
from varcast.exceptions import ConfigError, VarcastError
from varcast.ingest import fetch_trace, load_csv, split_70_30
from varcast.learners import make_learner, make_windows, rolling_predictions
from varcast.oirf import CSV_HEADER, bootstrap_bands, orthogonal_irf
from varcast.varmodel import (Z95, companion, fit_var, forecast, is_stable,
                              load_model, rolling_one_step, save_model)

COMMANDS = ('diagnose', 'fit', 'forecast', 'oirf', 'compare', 'fetch')
# docopt flag -> RunConfig field
FLAGS = {'--input': 'input', '--columns': 'columns', '--missing': 'missing',
         '--out': 'out', '--p': 'p', '--p-max': 'p_max', '--lm-h': 'lm_h',
         '--adf-spec': 'adf_spec', '--adf-lag': 'adf_lag', '--model': 'model',
         '--horizon': 'horizon', '--ordering': 'ordering', '--reps': 'reps',
         '--allow-degenerate': 'allow_degenerate', '--learners': 'learners',
         '--window': 'window', '--ridge': 'ridge', '--timing-reps': 'timing_reps',
         '--parallel-timing': 'parallel_timing', '--seed': 'seed',
         '--flow-id': 'flow_id', '--codec': 'codec',
         '--verbose': 'verbose'}
# learner name -> random stream, None when training is deterministic
LEARNER_STREAMS = {'linear': None, 'forest': 'forest', 'mlp': 'perceptron'}

log = logging.getLogger(__name__)


class VarcastFilter(logging.Filter):
    def filter(self, rec):
        if rec.name.startswith('varcast') or rec.name == '__main__':
            return True
        else:
            return rec.levelno >= logging.WARNING

handler = logging.StreamHandler()
handler.addFilter(VarcastFilter())
handler.setFormatter(logging.Formatter('%(message)s'))


def setup_logging(verbose=False):
    root = logging.getLogger()
    if handler not in root.handlers:
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    varcast.DEBUG = verbose


def _flags(arguments):
    flags = {}
    for flag, key in FLAGS.items():
        value = arguments.get(flag)
        # unset switches must not override config files
        if value is False:
            value = None
        flags[key] = value
    return flags


def _load(config):
    if not config.input:
        raise ConfigError('no input trace, use --input')
    return load_csv(config.input, config.columns, config.missing)


def _lag_order(config, frame):
    if config.p != AUTO:
        return config.p
    scan = aic_scan(frame, config.p_max)
    log.info('AIC selects p={0}'.format(scan.best_p))
    return scan.best_p


def _metadata(config):
    return {'config_hash': config.digest(), 'seed': config.seed,
            'flow_id': config.flow_id, 'codec': config.codec}


def _out(config, name):
    if not os.path.isdir(config.out):
        os.makedirs(config.out)
    return os.path.join(config.out, name)


def cmd_diagnose(config):
    """ AIC scan, LM/ES tables for the two best lags, ADF, stability and CUSUM. """
    frame = _load(config)
    report = run_diagnostics(frame, config.p_max, config.lm_h, config.adf_spec,
                             None if config.adf_lag == AUTO else config.adf_lag,
                             None if config.p == AUTO else config.p)
    doc = report.to_dict()
    doc.update(_metadata(config))
    doc['names'] = frame.names
    config_hash = config.digest()

    paths = [write_json(doc, _out(config, 'diagnostics.json'))]
    aic = pd.DataFrame({'p': np.arange(1, report.aic.p_max + 1), 'aic': report.aic.values})
    paths.append(write_csv_table(aic, _out(config, 'aic.csv'), config_hash))
    cusum = pd.concat([pd.DataFrame({'variable': c.name, 'time': c.times, 'path': c.path,
                                     'boundary': c.boundary}) for c in report.cusum],
                      ignore_index=True)
    paths.append(write_csv_table(cusum, _out(config, 'cusum.csv'), config_hash))
    eig = report.stability.eigenvalues
    eigen = pd.DataFrame({'real': eig.real, 'imag': eig.imag,
                          'modulus': report.stability.eigen_moduli})
    paths.append(write_csv_table(eigen, _out(config, 'eigen.csv'), config_hash))
    paths.append(write_meta(paths, config.out, 'diagnostics', config_hash))
    return paths


def cmd_fit(config):
    """ Fit a VAR(p) on the whole trace and write its JSON model file. """
    frame = _load(config)
    p = _lag_order(config, frame)
    model = fit_var(frame, p)
    cm = companion(model)
    if not is_stable(cm):
        log.warning('VAR({0}) is not stable, max modulus {1:.4f}'.format(p, cm.max_modulus))
    extra = _metadata(config)
    extra.update({'max_modulus': cm.max_modulus, 'stable': is_stable(cm)})
    paths = [save_model(model, _out(config, 'model.json'), extra)]
    paths.append(write_meta(paths, config.out, 'model', config.digest()))
    return paths


def cmd_forecast(config):
    """ h-step forecasts with 95% bands from the end of the trace. """
    if config.horizon < 1:
        raise ConfigError('forecast horizon must be >= 1')
    frame = _load(config)
    if config.model:
        model = load_model(config.model)
        frame = frame.reorder(model.names)
    else:
        model = fit_var(frame, _lag_order(config, frame))
    fc = forecast(model, frame, config.horizon)
    parts = []
    for j, name in enumerate(model.names):
        parts.append(pd.DataFrame({'step': np.arange(1, fc.horizon + 1), 'variable': name,
                                   'point': fc.point[j], 'lo95': fc.lower[j],
                                   'hi95': fc.upper[j]}))
    df = pd.concat(parts, ignore_index=True)[['step', 'variable', 'point', 'lo95', 'hi95']]
    paths = [write_csv_table(df, _out(config, 'forecast.csv'), config.digest())]
    paths.append(write_meta(paths, config.out, 'forecast', config.digest()))
    return paths


def cmd_oirf(config):
    """ Orthogonal impulse responses of every (impulse, response) pair. """
    frame = _load(config)
    p = _lag_order(config, frame)
    model = fit_var(frame, p)
    if config.reps:
        irf = bootstrap_bands(model, config.horizon, config.reps,
                              seed=config.seed_sequence('bootstrap'),
                              ordering=config.ordering,
                              allow_degenerate=config.allow_degenerate)
    else:
        irf = orthogonal_irf(model, config.horizon, config.ordering)
    df = pd.DataFrame(list(irf.to_rows()), columns=CSV_HEADER)
    summary = _metadata(config)
    summary.update({'p': p, 'horizon': irf.horizon, 'ordering': irf.ordering,
                    'names': irf.names, 'reps': irf.reps, 'failures': irf.failures,
                    'pairs': len(irf.names) ** 2})
    paths = [write_csv_table(df, _out(config, 'oirf.csv'), config.digest()),
             write_json(summary, _out(config, 'oirf.json'))]
    paths.append(write_meta(paths, config.out, 'oirf', config.digest()))
    return paths


def _technique_task(name, config, frame, split, p, w):
    if name == 'var':
        return (lambda: rolling_one_step(fit_var(split.train, p), frame, split)), {'p': p}
    params = {'penalty': config.ridge} if name == 'linear' else {}
    stream = LEARNER_STREAMS[name]

    def task():
        learner = make_learner(name, **params)
        learner.train(make_windows(split.train, w),
                      config.substream(stream) if stream else None)
        return rolling_predictions(learner, frame, split)
    return task, make_learner(name, **params).params()


def cmd_compare(config):
    """ 70/30 split, rolling one-step forecasts per technique, scores and timings. """
    frame = _load(config)
    split = split_70_30(frame)
    p = _lag_order(config, split.train)
    w = p if config.window == AUTO else config.window
    log.info('VAR order {0}, learner window {1}'.format(p, w))

    cards = []
    paths = []
    for name in config.learners:
        task, params = _technique_task(name, config, frame, split, p, w)
        window = p if name == 'var' else w
        timing = None
        if config.timing_reps:
            timing = time_technique(task, config.timing_reps,
                                    parallel=config.parallel_timing)
            predicted = timing.result
        else:
            predicted = task()
        lower = upper = None
        if name == 'var':
            half = Z95 * fit_var(split.train, p).std
            lower = predicted - half[:, np.newaxis]
            upper = predicted + half[:, np.newaxis]
        cards.append(ScoreCard(name, score(split.test.data, predicted, frame.names),
                               window=window, seed=config.seed, timing=timing,
                               params=params))
        paths.append(write_plot_data(config.out, name, frame.names, split.test.data,
                                     predicted, split.split_index, lower, upper,
                                     config.digest(), stem='compare'))
        log.info('{0} done'.format(name))

    metadata = _metadata(config)
    metadata.update({'p': p, 'window': w, 'split_index': split.split_index,
                     'names': frame.names})
    report = build_report(cards, metadata=metadata)
    for var_name, technique in sorted(report['best_by_mape'].items()):
        log.info('best MAPE on {0}: {1}'.format(var_name, technique))
    return paths + write_report(report, config.out, 'compare')


def cmd_fetch(url, out):
    if not os.path.isdir(out):
        os.makedirs(out)
    return [fetch_trace(url, out)]


def run(arguments):
    """ Dispatch parsed arguments, returns the written paths. """
    if arguments['fetch']:
        out = arguments['--out'] or RunConfig.from_sources().out
        return cmd_fetch(arguments['<url>'], out)
    config = RunConfig.from_sources(_flags(arguments), arguments.get('--config'))
    for command in COMMANDS:
        if arguments[command]:
            return globals()['cmd_{0}'.format(command)](config)


def main(argv=None):
    try:
        arguments = docopt(__doc__, argv=argv, version=__version__)
    except DocoptExit as exc:
        sys.stderr.write('{0}\n'.format(exc))
        return ConfigError.exit_code

    setup_logging(arguments['--verbose'])
    try:
        for path in run(arguments):
            log.info(path)
    except VarcastError as exc:
        log.error('varcast: error: {0}'.format(exc))
        return exc.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
