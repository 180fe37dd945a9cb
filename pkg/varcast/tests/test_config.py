# -*- encoding: utf-8 -*-

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import os
import unittest

import numpy as np
import simplejson as json

from varcast import check_hash
from varcast.tests import VarcastTestCase
from varcast.config import AUTO, DEFAULTS, RunConfig, load_conf
from varcast.exceptions import ConfigError


class TestRunConfig(VarcastTestCase):
    def _conf(self, doc, name='conf.json'):
        path = os.path.join(self.tmpdir, name)
        with open(path, 'w') as fh:
            json.dump(doc, fh)
        return path

    def testDefaults(self):
        config = RunConfig()
        self.assertEqual(config.p, AUTO)
        self.assertEqual(config.p_max, 15)
        self.assertEqual(config.learners, ['var', 'linear', 'forest', 'mlp'])
        config.learners.append('var')
        self.assertEqual(len(DEFAULTS['learners']), 4)

    def testLayering(self):
        user = self._conf({'reps': 300, 'seed': 5, 'p-max': 4}, 'user.json')
        run = self._conf({'seed': 7, 'horizon': 10})
        config = RunConfig.from_sources({'seed': '9', 'horizon': None}, run, user_config=user)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.reps, 300)
        self.assertEqual(config.horizon, 10)
        self.assertEqual(config.p_max, 4)

    def testMissingUserConfig(self):
        config = RunConfig.from_sources({}, None,
                                        user_config=os.path.join(self.tmpdir, 'none.json'))
        self.assertEqual(config.seed, 0)

    def testParallelTiming(self):
        self.assertFalse(RunConfig().parallel_timing)
        run = self._conf({'parallel-timing': True})
        self.assertTrue(RunConfig.from_sources({'parallel_timing': None}, run,
                                               user_config=None).parallel_timing)
        self.assertNotEqual(RunConfig(parallel_timing=True).digest(), RunConfig().digest())

    def testConversions(self):
        config = RunConfig(p='3', window='auto', learners='var, linear', ordering='rtt,mos',
                           ridge='0.5')
        self.assertEqual(config.p, 3)
        self.assertEqual(config.window, AUTO)
        self.assertEqual(config.learners, ['var', 'linear'])
        self.assertEqual(config.ordering, ['rtt', 'mos'])
        self.assertEqual(config.ridge, 0.5)

    def testValidation(self):
        for bad in ({'p_max': 0}, {'p_max': 51}, {'timing_reps': 2}, {'reps': -1},
                    {'ridge': -1.}, {'p': 0}, {'window': 'x'}, {'adf_spec': 'nc'},
                    {'missing': 'drop'}, {'learners': ''}, {'seed': -1}, {'colour': 1}):
            with self.assertRaises(ConfigError):
                RunConfig(**bad)
        self.assertEqual(RunConfig(timing_reps=0).timing_reps, 0)

    def testUnknownLearner(self):
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(learners='var,lstm')
        self.assertIn('lstm', str(ctx.exception))
        self.assertIn('var, linear, forest, mlp', str(ctx.exception))
        self.assertEqual(ctx.exception.exit_code, 2)

    def testBrokenFiles(self):
        path = os.path.join(self.tmpdir, 'broken.json')
        with open(path, 'w') as fh:
            fh.write('{seed: 1')
        with self.assertRaises(ConfigError):
            load_conf(path)
        with self.assertRaises(ConfigError):
            load_conf(self._conf([1, 2]))
        with self.assertRaises(ConfigError):
            RunConfig.from_sources({}, os.path.join(self.tmpdir, 'nope.json'), user_config=None)


class TestDigest(VarcastTestCase):
    def testStable(self):
        a = RunConfig(seed=3, learners=['var', 'mlp'])
        b = RunConfig(learners='var,mlp', seed='3')
        self.assertEqual(a.digest(), b.digest())
        self.assertTrue(check_hash(a.digest()))

    def testHashedFields(self):
        base = RunConfig().digest()
        self.assertEqual(RunConfig(out='elsewhere', verbose=True).digest(), base)
        self.assertNotEqual(RunConfig(seed=1).digest(), base)
        self.assertNotEqual(RunConfig(reps=100).digest(), base)


class TestStreams(VarcastTestCase):
    def testReproducible(self):
        a = RunConfig(seed=42).substream('forest').standard_normal(5)
        b = RunConfig(seed=42).substream('forest').standard_normal(5)
        self.assertTrue(np.array_equal(a, b))

    def testIndependent(self):
        config = RunConfig(seed=42)
        draws = [config.substream(name).standard_normal(5)
                 for name in ('bootstrap', 'forest', 'perceptron')]
        for i in range(len(draws)):
            for j in range(i + 1, len(draws)):
                self.assertFalse(np.array_equal(draws[i], draws[j]))
        other = RunConfig(seed=43).substream('forest').standard_normal(5)
        self.assertFalse(np.array_equal(draws[1], other))

    def testUnknownStream(self):
        with self.assertRaises(ConfigError):
            RunConfig().substream('lstm')


if __name__ == '__main__':
    unittest.main()
