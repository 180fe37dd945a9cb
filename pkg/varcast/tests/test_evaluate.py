# -*- encoding: utf-8 -*-

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import os
import unittest
from datetime import datetime

import numpy as np
import pandas as pd
import simplejson as json

from varcast.tests import VarcastTestCase
from varcast.exceptions import ConfigError, DataError
from varcast.evaluate import (PARALLEL_CAVEAT, PLOT_CSV_COLUMNS, REPORT_CSV_COLUMNS, Score,
                              ScoreCard, TimingSummary, best_by_mape, build_report, score,
                              time_technique, write_plot_data, write_report)
from varcast.ingest import split_70_30
from varcast.learners import make_learner, make_windows, rolling_predictions
from varcast.varmodel import fit_var, rolling_one_step

HASH = 'sha1-' + 'a' * 40


def _card(technique, mapes):
    scores = dict((name, Score(1., 1., mape, 10, 10)) for name, mape in mapes.items())
    return ScoreCard(technique, scores, window=2, seed=0)


class TestScore(VarcastTestCase):
    def testSinglePoint(self):
        s = score([[100.]], [[90.]], ['mos'])['mos']
        self.assertAlmostEqual(s.rmse, 10.)
        self.assertAlmostEqual(s.mae, 10.)
        self.assertAlmostEqual(s.mape, 10.)

    def testTwoPoints(self):
        s = score([[1., 3.]], [[2., 2.]])['y1']
        self.assertAlmostEqual(s.rmse, 1.)
        self.assertAlmostEqual(s.mae, 1.)
        self.assertAlmostEqual(s.mape, 66.6666666667, places=6)
        self.assertEqual(s.mape_coverage, 1.)

    def testZeroActual(self):
        s = score([[0., 2.]], [[1., 1.]])['y1']
        self.assertAlmostEqual(s.mape, 50.)
        self.assertEqual(s.mape_count, 1)
        self.assertEqual(s.mape_coverage, 0.5)
        self.assertIsNone(score([[0., 0.]], [[1., 1.]])['y1'].mape)

    def testRmseAboveMae(self):
        rng = self.rng(1)
        scales = rng.uniform(0.1, 5., size=(10000, 1))
        a = rng.standard_normal((10000, 20))
        f = a + rng.standard_normal((10000, 20)) * scales
        for s in score(a, f).values():
            self.assertGreaterEqual(s.rmse, s.mae - 1e-12)
        # equality when every absolute error is the same
        s = score([[1., 2., 3., 4.]], [[1.5, 1.5, 3.5, 3.5]])['y1']
        self.assertAlmostEqual(s.rmse, s.mae, delta=1e-15)

    def testTimePermutation(self):
        rng = self.rng(2)
        a = rng.uniform(1., 5., (3, 40))
        f = a + rng.standard_normal((3, 40))
        perm = rng.permutation(40)
        before = score(a, f)
        after = score(a[:, perm], f[:, perm])
        for name in before:
            self.assertAlmostEqual(before[name].rmse, after[name].rmse, delta=1e-12)
            self.assertAlmostEqual(before[name].mae, after[name].mae, delta=1e-12)
            self.assertAlmostEqual(before[name].mape, after[name].mape, delta=1e-10)

    def testScaling(self):
        rng = self.rng(3)
        a = rng.uniform(1., 5., (2, 30))
        f = a + rng.standard_normal((2, 30))
        before = score(a, f)
        after = score(7.5 * a, 7.5 * f)
        for name in before:
            self.assertAlmostEqual(after[name].rmse, 7.5 * before[name].rmse, delta=1e-10)
            self.assertAlmostEqual(after[name].mae, 7.5 * before[name].mae, delta=1e-10)
            self.assertAlmostEqual(after[name].mape, before[name].mape, delta=1e-10)

    def testShapeMismatch(self):
        with self.assertRaises(DataError):
            score([[1., 2.]], [[1.]])


class TestTiming(VarcastTestCase):
    def testQuartiles(self):
        summary = TimingSummary([1., 2., 4.])
        self.assertEqual(summary.median, 2.)
        self.assertEqual(summary.q1, 1.5)
        self.assertEqual(summary.q3, 3.)
        self.assertEqual(summary.iqr, 1.5)
        self.assertEqual(summary.to_dict()['reps'], 3)

    def testTooFewReps(self):
        with self.assertRaises(ConfigError):
            time_technique(lambda: None, reps=2)

    def testResultAndParallel(self):
        summary = time_technique(lambda: 42, reps=4)
        self.assertEqual(len(summary.durations), 4)
        self.assertEqual(summary.result, 42)
        summary = time_technique(lambda: 7, reps=3, parallel=True, workers=2)
        self.assertEqual(summary.result, 7)
        self.assertTrue(summary.to_dict()['parallel'])
        self.assertEqual(summary.to_dict()['caveat'], PARALLEL_CAVEAT)

    def testPartialTimings(self):
        calls = []

        def task():
            calls.append(1)
            if len(calls) == 3:
                raise RuntimeError('boom')

        with self.assertRaises(RuntimeError) as ctx:
            time_technique(task, reps=5)
        self.assertEqual(len(ctx.exception.partial_timings), 2)

    def testConstantDuration(self):
        summary = time_technique(lambda: sum(i * i for i in range(300000)), reps=9)
        self.assertLessEqual(summary.iqr, 0.05 * summary.median)

    def testCostOrdering(self):
        frame = self.qos_frame(length=566)
        split = split_70_30(frame)

        def var():
            return rolling_one_step(fit_var(split.train, 2), frame, split)

        def learner(kind):
            def task():
                model = make_learner(kind)
                model.train(make_windows(split.train, 2), 0)
                return rolling_predictions(model, frame, split)
            return task

        timings = dict((name, time_technique(task, reps=3)) for name, task in
                       [('var', var), ('forest', learner('forest')), ('mlp', learner('mlp'))])
        self.assertLess(timings['var'].median, timings['forest'].median)
        self.assertLess(timings['forest'].median, timings['mlp'].median)
        self.assertLess(timings['var'].median, 1.)


class TestReport(VarcastTestCase):
    def testBestByMape(self):
        cards = [_card('var', {'mos': 0.3, 'rtt': 2.}), _card('forest', {'mos': 0.86,
                                                                         'rtt': 1.})]
        best = best_by_mape(cards)
        self.assertEqual(best['mos'], ('var', ['var']))
        self.assertEqual(best['rtt'], ('forest', ['forest']))

    def testTies(self):
        cards = [_card('var', {'mos': 0.5}), _card('linear', {'mos': 0.5})]
        report = build_report(cards)
        self.assertEqual(report['best_by_mape'], {'mos': 'linear'})
        self.assertEqual(report['mape_ties'], {'mos': ['linear', 'var']})

    def testDocument(self):
        report = build_report([_card('var', {'mos': 0.3})],
                              metadata={'flow_id': 'f1', 'codec': 'G.722',
                                        'config_hash': HASH})
        self.assertEqual(report['flow_id'], 'f1')
        self.assertEqual(report['codec'], 'G.722')
        tech = report['techniques'][0]
        self.assertEqual(set(tech), set(['name', 'window', 'seed', 'params', 'metrics',
                                         'timing']))
        self.assertIsNone(tech['timing'])
        self.assertNotIn('mape_ties', report)
        with self.assertRaises(DataError):
            build_report([])

    def testWriteReport(self):
        report = build_report([_card('var', {'mos': 0.3, 'rtt': 1.2})],
                              metadata={'config_hash': HASH})
        now = datetime(2020, 1, 2, 3, 4, 5)
        paths = write_report(report, self.tmpdir, 'compare', now=now)
        self.assertEqual([os.path.basename(p) for p in paths],
                         ['compare.json', 'compare.csv', 'compare.meta.json'])
        with open(paths[1]) as fh:
            self.assertEqual(fh.readline(), '# config_hash: {0}\n'.format(HASH))
        table = pd.read_csv(paths[1], comment='#')
        self.assertEqual(list(table.columns), REPORT_CSV_COLUMNS)
        self.assertEqual(len(table), 2)
        with open(paths[2]) as fh:
            meta = json.load(fh)
        self.assertEqual(meta['created'], '2020-01-02T03:04:05Z')
        self.assertEqual(meta['files'], ['compare.csv', 'compare.json'])

        other = os.path.join(self.tmpdir, 'again')
        again = write_report(report, other, 'compare', now=now)
        for a, b in zip(paths, again):
            with open(a, 'rb') as fa, open(b, 'rb') as fb:
                self.assertEqual(fa.read(), fb.read())

    def testTimingsInSidecar(self):
        card = _card('var', {'mos': 0.3})
        card.timing = TimingSummary([1., 2., 4.], parallel=True)
        report = build_report([card], metadata={'config_hash': HASH})
        paths = write_report(report, self.tmpdir, 'compare',
                             now=datetime(2020, 1, 2, 3, 4, 5))
        with open(paths[0]) as fh:
            tech = json.load(fh)['techniques'][0]
        self.assertEqual(tech['timing'], {'reps': 3, 'parallel': True,
                                          'caveat': PARALLEL_CAVEAT,
                                          'file': 'compare.meta.json'})
        with open(paths[2]) as fh:
            timing = json.load(fh)['timing']['var']
        self.assertEqual(timing['median'], 2.)
        self.assertEqual(timing['iqr'], 1.5)
        self.assertEqual(report['techniques'][0]['timing']['median'], 2.)

    def testPlotData(self):
        actual = np.array([[1., 2.], [3., 4.]])
        path = write_plot_data(self.tmpdir, 'var', ['mos', 'rtt'], actual, actual + 0.5,
                               start=7, lower=actual, upper=actual + 1., config_hash=HASH)
        self.assertEqual(os.path.basename(path), 'plot-var.csv')
        table = pd.read_csv(path, comment='#')
        self.assertEqual(list(table.columns), PLOT_CSV_COLUMNS)
        self.assertEqual(table['t'].tolist(), [7, 8, 7, 8])
        self.assertEqual(table['hi95'].tolist(), [2., 3., 4., 5.])

        path = write_plot_data(self.tmpdir, 'forest', ['mos'], [[1., 2.]], [[1., 1.]])
        table = pd.read_csv(path)
        self.assertTrue(table['lo95'].isnull().all())


if __name__ == '__main__':
    unittest.main()
