# -*- coding: utf-8 -*-

""" Exceptions raised by varcast, each one mapped to a CLI exit code. """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'


class VarcastError(Exception):
    """ Base class, `exit_code' is what the command line tool returns. """
    exit_code = 1


class ConfigError(VarcastError):
    """ Invalid flags, config file or parameter out of its range. """
    exit_code = 2


class DataError(VarcastError):
    """ Unreadable, malformed or too short input trace. """
    exit_code = 3


class NumericalError(VarcastError):
    """ Singular regression, non positive-definite covariance, etc. """
    exit_code = 4


class EstimationError(NumericalError):
    """ OLS estimation failure.

    Args:
        message: what went wrong
        variable: name of the offending variable, if known.

    """
    def __init__(self, message, variable=None):
        if variable is not None:
            message = '{0} (variable: {1})'.format(message, variable)
        super(EstimationError, self).__init__(message)
        self.variable = variable


class DomainError(ValueError, VarcastError):
    """ Scalar argument outside of its mathematical domain. """
    exit_code = 3
