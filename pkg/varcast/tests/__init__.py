# -*- encoding: utf-8 -*-

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging
import os
import shutil
import tempfile
import unittest

import numpy as np

logging.basicConfig(level=logging.INFO)

import varcast
from varcast.ingest import frame_from_array, write_csv
from varcast.varmodel import simulate_var

# Local copy of the published G.722 post-processed trace, reproduction
# checks are skipped without it.
VARCAST_G722_TRACE = os.environ.get('VARCAST_G722_TRACE')
G722_COLUMNS = 'mos,bw,rtt,jitter,buffer,snr'

# Stable bivariate VAR(1).
PHI1 = [[0.5, 0.1],
        [0.2, 0.3]]
# Strong-signal bivariate VAR(2).
PHI2 = [[[0.5, 0.2], [0.1, 0.4]],
        [[-0.4, 0.1], [0.0, -0.3]]]


class VarcastTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='varcast-test-')

    def tearDown(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def rng(self, seed=0):
        return np.random.default_rng(seed)

    def simulate(self, phi, length, seed=0, c=None, sigma=None, names=None, burn=200):
        """ MetricFrame of a Gaussian VAR, unit innovations by default. """
        phi = [np.atleast_2d(m) for m in phi]
        n = phi[0].shape[0]
        c = np.zeros(n) if c is None else c
        sigma = np.eye(n) if sigma is None else sigma
        data = simulate_var(c, phi, sigma, length, self.rng(seed), burn=burn)
        return frame_from_array(data, names=names)

    def var1(self, length=500, seed=0, **kwargs):
        return self.simulate([PHI1], length, seed, **kwargs)

    def var2(self, length=2000, seed=0, **kwargs):
        return self.simulate(PHI2, length, seed, **kwargs)

    def qos_frame(self, length=566, seed=0):
        """ Six QoS-like variables on their natural scales. """
        phi = np.diag([0.6, 0.5, 0.7, 0.4, 0.5, 0.3])
        phi[0, 1] = 0.05
        noise = self.simulate([phi], length, seed).data
        levels = np.array([4.1, 64., 180., 12., 60., 25.])[:, np.newaxis]
        scales = np.array([0.05, 2., 15., 3., 5., 1.5])[:, np.newaxis]
        data = levels + scales * noise
        return frame_from_array(data, names=['mos', 'bw', 'rtt', 'jitter', 'buffer', 'snr'])

    def write_trace(self, frame, name='trace.csv'):
        path = os.path.join(self.tmpdir, name)
        write_csv(frame, path)
        return path

    def assertAllClose(self, a, b, atol=1e-10, rtol=0.):
        np.testing.assert_allclose(a, b, atol=atol, rtol=rtol)
