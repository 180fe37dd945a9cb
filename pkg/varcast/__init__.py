""" Characterization and forecasting of multivariate VoIP QoS/QoE traces. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'
__version__ = '0.1.0'

import hashlib
import logging
import re

from varcast.exceptions import (VarcastError, ConfigError, DataError,
                                NumericalError, EstimationError, DomainError)
from varcast.ingest import (MetricFrame, SplitFrame, load_csv, write_csv,
                            mos_from_r, jitter_series, split_70_30)
from varcast.varmodel import (VarModel, fit_var, companion, is_stable,
                              forecast, rolling_one_step)

__all__ = ['MetricFrame', 'SplitFrame', 'VarModel', 'load_csv', 'write_csv',
           'mos_from_r', 'jitter_series', 'split_70_30', 'fit_var',
           'companion', 'is_stable', 'forecast', 'rolling_one_step',
           'compute_hash', 'check_hash',
           'VarcastError', 'ConfigError', 'DataError', 'NumericalError',
           'EstimationError', 'DomainError']

DEBUG = False

log = logging.getLogger(__name__)


def compute_hash(data):
    """ Return the `sha1-<hex>' reference of a string or bytes. """
    if isinstance(data, str):
        data = data.encode('utf-8')
    return 'sha1-{0}'.format(hashlib.sha1(data).hexdigest())


def check_hash(_hash):
    """ Check if the hash is valid. """
    return bool(re.match(r'^sha1-[a-f0-9]{40}$', _hash))
