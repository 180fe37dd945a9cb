# -*- encoding: utf-8 -*-

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import os
import unittest
from unittest import mock

import numpy as np
import requests

from varcast.tests import VarcastTestCase
from varcast.exceptions import ConfigError, DataError, DomainError
from varcast.ingest import (MetricFrame, fetch_trace, frame_from_array, jitter_series,
                            load_csv, mos_from_r, outlier_summary, parse_schema,
                            split_70_30)


class TestMetricFrame(VarcastTestCase):
    def testReadOnly(self):
        frame = frame_from_array([[1., 2., 3.]])
        with self.assertRaises(ValueError):
            frame.data[0, 0] = 5.

    def testShapeAndLabels(self):
        frame = MetricFrame(['mos', 'rtt'], ['', 'ms'], np.zeros((2, 4)))
        self.assertEqual(frame.n_vars, 2)
        self.assertEqual(frame.length, 4)
        self.assertEqual(list(frame.row('rtt')), [0.] * 4)
        with self.assertRaises(DataError):
            frame.row('snr')

    def testInvalid(self):
        with self.assertRaises(DataError):
            MetricFrame(['a'], [''], [[1., np.nan]])
        with self.assertRaises(DataError):
            MetricFrame(['a', 'a'], ['', ''], np.zeros((2, 3)))
        with self.assertRaises(DataError):
            MetricFrame(['a'], ['', ''], np.zeros((1, 3)))

    def testReorder(self):
        frame = frame_from_array([[1., 2.], [3., 4.]], names=['a', 'b'])
        swapped = frame.reorder(['b', 'a'])
        self.assertEqual(swapped.names, ['b', 'a'])
        self.assertEqual(list(swapped.column(0)), [3., 1.])
        with self.assertRaises(ConfigError):
            frame.reorder(['a', 'c'])


class TestLoadCsv(VarcastTestCase):
    def _write(self, text, name='trace.csv'):
        path = os.path.join(self.tmpdir, name)
        with open(path, 'w') as fh:
            fh.write(text)
        return path

    def testRoundTrip(self):
        frame = self.qos_frame(length=50)
        path = self.write_trace(frame)
        loaded = load_csv(path, ','.join(frame.names))
        self.assertEqual(loaded, frame)

    def testSchemaUnits(self):
        self.assertEqual(parse_schema('mos,bw:kb/s,x'),
                         [('mos', ''), ('bw', 'kb/s'), ('x', '')])
        self.assertEqual(parse_schema('rtt'), [('rtt', 'ms')])

    def testColumnSubsetAndOrder(self):
        path = self._write('rtt,mos,extra\n100,4.1,x\n120,4.0,y\n')
        frame = load_csv(path, 'mos,rtt')
        self.assertEqual(frame.names, ['mos', 'rtt'])
        self.assertEqual(list(frame.row('rtt')), [100., 120.])
        self.assertEqual(frame.units, ['', 'ms'])

    def testSamplePeriodColumn(self):
        path = self._write('mos,sample_period\n4.1,5\n4.2,5\n4.0,5\n')
        frame = load_csv(path, 'mos')
        self.assertEqual(frame.sample_period, 5.)
        self.assertEqual(frame.names, ['mos'])

    def testMissingReject(self):
        path = self._write('mos,rtt\n4.1,100\n,110\n4.0,120\n')
        with self.assertRaises(DataError):
            load_csv(path, 'mos,rtt')

    def testMissingInterpolate(self):
        path = self._write('mos,rtt\n4.0,100\nNA,110\n4.2,120\n4.4,\n')
        frame = load_csv(path, 'mos,rtt', missing='interpolate')
        self.assertAllClose(frame.row('mos'), [4.0, 4.1, 4.2, 4.4])
        # trailing gap copies the last value
        self.assertAllClose(frame.row('rtt'), [100., 110., 120., 120.])

    def testNonNumeric(self):
        path = self._write('mos\n4.1\nabc\n')
        with self.assertRaises(DataError):
            load_csv(path, 'mos')

    def testUnknownColumn(self):
        path = self._write('mos\n4.1\n4.2\n')
        with self.assertRaises(DataError):
            load_csv(path, 'mos,snr')

    def testEmptyFile(self):
        path = self._write('', 'empty.csv')
        with self.assertRaises(ConfigError) as ctx:
            load_csv(path, 'mos')
        self.assertIn(path, str(ctx.exception))
        self.assertEqual(ctx.exception.exit_code, 2)

    def testMissingFile(self):
        with self.assertRaises(ConfigError):
            load_csv(os.path.join(self.tmpdir, 'nope.csv'), 'mos')

    def testUnknownPolicy(self):
        with self.assertRaises(ConfigError):
            load_csv(self._write('mos\n1\n2\n'), 'mos', missing='drop')


class TestDerivedMetrics(VarcastTestCase):
    def testMosFromR(self):
        self.assertAlmostEqual(mos_from_r(0), 1.)
        self.assertAlmostEqual(mos_from_r(100), 4.5)
        self.assertAlmostEqual(mos_from_r(60), 3.1)
        self.assertAlmostEqual(mos_from_r(50), 2.575)
        self.assertAllClose(mos_from_r([0., 100.]), [1., 4.5])

    def testMosMonotone(self):
        r = np.linspace(0, 100, 1001)
        self.assertTrue(np.all(np.diff(mos_from_r(r)) >= 0))
        self.assertTrue(np.all(mos_from_r(r) >= 1.))
        r = np.linspace(10, 100, 91)
        self.assertTrue(np.all(np.diff(mos_from_r(r)) > 0))

    def testMosDomain(self):
        for r in (-1., 100.5, np.nan):
            with self.assertRaises(DomainError):
                mos_from_r(r)
        # DomainError is also a ValueError
        self.assertRaises(ValueError, mos_from_r, 101)

    def testJitter(self):
        jitter = jitter_series([0., 1., 2.], [0.05, 1.10, 2.05])
        self.assertAllClose(jitter, [50., 50.], atol=1e-9)

    def testJitterDirect(self):
        self.assertAllClose(jitter_series([0., 1.], [0.10, 1.14]), [40.], atol=1e-9)
        self.assertAllClose(jitter_series([0., 1., 2.], [0.10, 1.10, 2.10]), [0., 0.],
                            atol=1e-9)

    def testJitterOffsetInvariance(self):
        tx = np.array([0., 0.02, 0.04, 0.06])
        rx = tx + np.array([0.1, 0.13, 0.11, 0.12])
        self.assertAllClose(jitter_series(tx, rx), jitter_series(tx, rx + 3.), atol=1e-9)

    def testJitterConstantDelay(self):
        tx = np.arange(10) * 0.02
        self.assertAllClose(jitter_series(tx, tx + 0.15), np.zeros(9), atol=1e-9)

    def testJitterErrors(self):
        with self.assertRaises(DataError):
            jitter_series([0., 1.], [0.1])
        with self.assertRaises(DataError):
            jitter_series([0.], [0.1])


class TestSplit(VarcastTestCase):
    def testSplitIndex(self):
        split = split_70_30(frame_from_array(np.arange(10.)))
        self.assertEqual(split.split_index, 7)
        self.assertEqual(split.train.length, 7)
        self.assertEqual(split.test.length, 3)

    def testQosLength(self):
        split = split_70_30(self.qos_frame(length=566))
        self.assertEqual((split.train.length, split.test.length), (396, 170))

    def testContiguous(self):
        frame = frame_from_array(np.arange(23.))
        split = split_70_30(frame)
        joined = np.hstack([split.train.data, split.test.data])
        self.assertTrue(np.array_equal(joined, frame.data))

    def testTooShort(self):
        with self.assertRaises(DataError):
            split_70_30(frame_from_array(np.arange(9.)))


class TestOutliers(VarcastTestCase):
    def testTukeyFences(self):
        frame = frame_from_array([list(range(1, 10)) + [100.]], names=['rtt'])
        summary = outlier_summary(frame)['rtt']
        self.assertEqual(summary['n_outliers'], 1)
        self.assertAlmostEqual(summary['median'], 5.5)


class TestFetchTrace(VarcastTestCase):
    def testStreamToDisk(self):
        response = mock.Mock(status_code=200)
        response.iter_content.return_value = [b'mos,rtt\n', b'', b'4.1,100\n']
        with mock.patch('varcast.ingest.requests.get', return_value=response) as get:
            path = fetch_trace('http://example.org/data/g722.csv?raw=1', self.tmpdir)
        self.assertEqual(path, os.path.join(self.tmpdir, 'g722.csv'))
        self.assertTrue(get.call_args[1]['stream'])
        with open(path, 'rb') as fh:
            self.assertEqual(fh.read(), b'mos,rtt\n4.1,100\n')

    def testNotFound(self):
        response = mock.Mock(status_code=404)
        with mock.patch('varcast.ingest.requests.get', return_value=response):
            with self.assertRaises(DataError):
                fetch_trace('http://example.org/missing.csv', self.tmpdir)

    def testConnectionError(self):
        with mock.patch('varcast.ingest.requests.get',
                        side_effect=requests.ConnectionError('down')):
            with self.assertRaises(DataError):
                fetch_trace('http://example.org/x.csv', self.tmpdir)


if __name__ == '__main__':
    unittest.main()
