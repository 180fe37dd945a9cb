# -*- coding: utf-8 -*-

""" Run configuration: defaults, config files and flags, layered in that order. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging
import os

import numpy as np
import simplejson as json

from varcast import compute_hash
from varcast.diagnostics import ADF_SPECS
from varcast.exceptions import ConfigError
from varcast.ingest import CANONICAL_NAMES, MISSING_POLICIES

USER_CONFIG = os.path.expanduser('~/.config/varcast/config.json')

AUTO = 'auto'
TECHNIQUES = ('var', 'linear', 'forest', 'mlp')
# Named random sub-streams, their position is their spawn key.
STREAMS = ('bootstrap', 'forest', 'perceptron')
MAX_SEED = 2 ** 64 - 1
# Fields left out of the digest.
UNHASHED = ('out', 'verbose')

DEFAULTS = {'input': None,
            'columns': ','.join(CANONICAL_NAMES),
            'missing': 'reject',
            'p': AUTO,
            'p_max': 15,
            'lm_h': 10,
            'window': AUTO,
            'learners': ['var', 'linear', 'forest', 'mlp'],
            'horizon': 25,
            'reps': 200,
            'allow_degenerate': False,
            'seed': 0,
            'out': 'varcast-out',
            'adf_spec': 'c',
            'adf_lag': AUTO,
            'ordering': None,
            'flow_id': None,
            'codec': None,
            'ridge': 0.,
            'timing_reps': 5,
            'parallel_timing': False,
            'model': None,
            'verbose': False}

log = logging.getLogger(__name__)


def load_conf(path):
    """ Read a JSON config file, keys may use dashes or underscores. """
    try:
        with open(path, 'rb') as fh:
            conf = json.loads(fh.read())
    except (IOError, OSError, ValueError) as exc:
        raise ConfigError('cannot read config file {0}: {1}'.format(path, exc))
    if not isinstance(conf, dict):
        raise ConfigError('config file {0} must hold a JSON object'.format(path))
    return dict((k.replace('-', '_'), v) for k, v in conf.items())


def _split_list(value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [v.strip() for v in str(value).split(',') if v.strip()]


def _auto_or_int(name, value, minimum):
    if value == AUTO or value is None:
        return AUTO
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError('{0} must be `auto\' or an integer, got {1!r}'.format(name, value))
    if value < minimum:
        raise ConfigError('{0} must be >= {1}, got {2}'.format(name, minimum, value))
    return value


def _int(name, value, minimum, maximum=None):
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError('{0} must be an integer, got {1!r}'.format(name, value))
    if value < minimum or (maximum is not None and value > maximum):
        raise ConfigError('{0} out of range [{1}, {2}]: {3}'.format(name, minimum,
                                                                  maximum or 'inf', value))
    return value


class RunConfig(object):
    """ Every setting of a varcast run.

    Use `RunConfig.from_sources' to apply the layering, `validate' is
    called by the constructor.

    """
    def __init__(self, **settings):
        unknown = set(settings) - set(DEFAULTS)
        if unknown:
            raise ConfigError('unknown setting(s): {0}'.format(', '.join(sorted(unknown))))
        values = dict((k, list(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items())
        values.update(settings)
        self.__dict__.update(values)
        self.validate()

    @classmethod
    def from_sources(cls, flags=None, config_path=None, user_config=USER_CONFIG):
        """ defaults < user config file < `config_path' < flags (None means unset). """
        settings = {}
        if user_config and os.path.isfile(user_config):
            log.debug('Loading {0}'.format(user_config))
            settings.update(load_conf(user_config))
        if config_path:
            if not os.path.isfile(config_path):
                raise ConfigError('config file not found: {0}'.format(config_path))
            settings.update(load_conf(config_path))
        for key, value in (flags or {}).items():
            if value is not None:
                settings[key] = value
        return cls(**settings)

    def validate(self):
        """ Normalize types and check every field against its range. """
        if self.missing not in MISSING_POLICIES:
            raise ConfigError('missing policy must be one of {0}'.format(', '.join(MISSING_POLICIES)))
        if self.adf_spec not in ADF_SPECS:
            raise ConfigError('ADF spec must be one of {0}'.format(', '.join(ADF_SPECS)))
        self.p = _auto_or_int('p', self.p, 1)
        self.window = _auto_or_int('window', self.window, 1)
        self.adf_lag = _auto_or_int('adf_lag', self.adf_lag, 0)
        self.p_max = _int('p_max', self.p_max, 1, 50)
        self.lm_h = _int('lm_h', self.lm_h, 1)
        self.horizon = _int('horizon', self.horizon, 0)
        self.reps = _int('reps', self.reps, 0)
        self.seed = _int('seed', self.seed, 0, MAX_SEED)
        self.timing_reps = _int('timing_reps', self.timing_reps, 0)
        if 0 < self.timing_reps < 3:
            raise ConfigError('timing_reps must be 0 (no timing) or >= 3')
        try:
            self.ridge = float(self.ridge)
        except (TypeError, ValueError):
            raise ConfigError('ridge must be a number, got {0!r}'.format(self.ridge))
        if not self.ridge >= 0:
            raise ConfigError('ridge penalty must be >= 0, got {0}'.format(self.ridge))
        self.learners = _split_list(self.learners)
        if not self.learners:
            raise ConfigError('at least one learner is needed')
        unknown = [l for l in self.learners if l not in TECHNIQUES]
        if unknown:
            raise ConfigError('unknown learner(s) {0}, valid names: {1}'.format(
                ', '.join(unknown), ', '.join(TECHNIQUES)))
        self.ordering = _split_list(self.ordering)
        self.allow_degenerate = bool(self.allow_degenerate)
        self.parallel_timing = bool(self.parallel_timing)
        self.verbose = bool(self.verbose)
        return self

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in sorted(DEFAULTS))

    def digest(self):
        """ `sha1-<hex>' of the canonical JSON of the hashed fields. """
        doc = dict((k, v) for k, v in self.to_dict().items() if k not in UNHASHED)
        return compute_hash(json.dumps(doc, sort_keys=True, separators=(',', ':')))

    def seed_sequence(self, name):
        """ SeedSequence of the named consumer, derived from the user seed. """
        if name not in STREAMS:
            raise ConfigError('unknown random stream {0}, valid: {1}'.format(name,
                                                                            ', '.join(STREAMS)))
        return np.random.SeedSequence(self.seed, spawn_key=(STREAMS.index(name),))

    def substream(self, name):
        """ Independent numpy Generator for the named consumer. """
        return np.random.default_rng(self.seed_sequence(name))

    def __repr__(self):
        return '<RunConfig {0}>'.format(self.digest())
