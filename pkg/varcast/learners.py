# -*- coding: utf-8 -*-

""" Sliding-window reframing and the machine-learning forecasters
(linear/ridge, random forest, single hidden layer perceptron). """

__author__ = 'Thomas Sileo (thomas@trucsdedev.com)'

import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.ensemble import RandomForestRegressor
from sklearn.linear_model import LinearRegression, Ridge
from sklearn.preprocessing import StandardScaler

import varcast
from varcast.exceptions import ConfigError, DataError
from varcast.ingest import MetricFrame

MAX_SEED = 2 ** 31 - 1
ACTIVATIONS = ('tanh', 'identity')

log = logging.getLogger(__name__)


class WindowedDataset(object):
    """ Supervised pairs built from a frame.

    Row t of `inputs' flattens y_t, ..., y_{t+w-1} (most recent last,
    N values per time step), row t of `targets' is y_{t+w}.

    """
    def __init__(self, inputs, targets, w, names=None):
        self.inputs = inputs
        self.targets = targets
        self.w = w
        self.names = names

    @property
    def n_vars(self):
        return self.targets.shape[1]

    def __len__(self):
        return self.inputs.shape[0]

    def __repr__(self):
        return '<WindowedDataset rows={0}, w={1}, N={2}>'.format(len(self), self.w,
                                                                self.n_vars)


def _as_data(frame):
    if isinstance(frame, MetricFrame):
        return frame.data, frame.names
    return np.atleast_2d(np.asarray(frame, dtype=np.float64)), None


def make_windows(frame, w):
    """ Reframe an N x L frame as L - w (window, next value) pairs. """
    data, names = _as_data(frame)
    n, length = data.shape
    if int(w) != w or w < 1:
        raise DataError('window length must be a positive integer, got {0}'.format(w))
    w = int(w)
    if length <= w:
        raise DataError('window length {0} needs more than {0} samples, got {1}'.format(w,
                                                                                       length))
    # (N, L - w + 1, w) -> (L - w, w, N), time-major rows
    view = sliding_window_view(data, w, axis=1)[:, :length - w, :]
    inputs = np.ascontiguousarray(view.transpose(1, 2, 0)).reshape(length - w, w * n)
    targets = data[:, w:].T.copy()
    return WindowedDataset(inputs, targets, w, names)


class Learner(object):
    """ Base class of the windowed forecasters.

    Subclasses implement `_fit(x, y, rng)' and `_predict(x)' on
    (optionally standardized) arrays.

    """
    kind = None
    scale_inputs = True
    scale_targets = True

    def __init__(self):
        self.w = None
        self.n_vars = None
        self._x_scaler = None
        self._y_scaler = None
        self._constant = None

    @property
    def fitted(self):
        return self.w is not None

    def params(self):
        """ Hyperparameters, as recorded in reports. """
        return {}

    def train(self, dataset, rng=None):
        """ Fit on a WindowedDataset, `rng' is a numpy Generator or a seed. """
        if not len(dataset):
            raise DataError('empty training set')
        rng = np.random.default_rng(rng)
        x, y = dataset.inputs, dataset.targets
        self.w = dataset.w
        self.n_vars = y.shape[1]
        self._constant = None
        if np.all(np.ptp(x, axis=0) == 0):
            log.warning('{0}: all training windows are identical, predicting the '
                        'target mean'.format(self.kind))
            self._constant = y.mean(axis=0)
            return self
        if self.scale_inputs:
            self._x_scaler = StandardScaler().fit(x)
            x = self._x_scaler.transform(x)
        if self.scale_targets:
            self._y_scaler = StandardScaler().fit(y)
            y = self._y_scaler.transform(y)
        self._fit(x, y, rng)
        if varcast.DEBUG:
            log.debug('{0} trained on {1} windows'.format(self.kind, len(dataset)))
        return self

    def predict(self, inputs):
        """ Predictions for a rows x (N w) input matrix. """
        if not self.fitted:
            raise DataError('{0} learner is not trained'.format(self.kind))
        inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        if inputs.shape[1] != self.n_vars * self.w:
            raise DataError('window of length {0}, expected {1}'.format(inputs.shape[1],
                                                                       self.n_vars * self.w))
        if self._constant is not None:
            return np.tile(self._constant, (inputs.shape[0], 1))
        if self._x_scaler is not None:
            inputs = self._x_scaler.transform(inputs)
        out = self._predict(inputs)
        if self._y_scaler is not None:
            out = self._y_scaler.inverse_transform(out)
        return out

    def predict_one_step(self, window):
        """ N-vector forecast from one flattened window of N w values. """
        window = np.asarray(window, dtype=np.float64).reshape(-1)
        return self.predict(window[np.newaxis, :])[0]

    def rolling_one_step(self, frame, split):
        """ One-step predictions for every test sample, N x test.L. """
        return rolling_predictions(self, frame, split)

    def _fit(self, x, y, rng):
        raise NotImplementedError

    def _predict(self, x):
        raise NotImplementedError

    def __repr__(self):
        return '<{0} {1}>'.format(self.__class__.__name__, self.params())


class LinearLearner(Learner):
    """ Multi-output least squares, ridge when `penalty' > 0. """
    kind = 'linear'

    def __init__(self, penalty=0.):
        super(LinearLearner, self).__init__()
        if not penalty >= 0:
            raise ConfigError('ridge penalty must be >= 0, got {0}'.format(penalty))
        self.penalty = float(penalty)
        self.model = None

    def params(self):
        return {'penalty': self.penalty}

    def _fit(self, x, y, rng):
        if self.penalty > 0:
            self.model = Ridge(alpha=self.penalty)
        else:
            self.model = LinearRegression()
        self.model.fit(x, y)

    def _predict(self, x):
        return self.model.predict(x)


class ForestLearner(Learner):
    """ One random forest per target variable.

    Args:
        trees: number of trees
        depth: maximum tree depth
        max_features: features tried per split, ceil(N w / 3) by default
        bootstrap: resample rows for each tree

    Trees split on variance reduction so the raw scales are kept.

    """
    kind = 'forest'
    scale_inputs = False
    scale_targets = False

    def __init__(self, trees=30, depth=10, max_features=None, bootstrap=True, workers=None):
        super(ForestLearner, self).__init__()
        if trees < 1:
            raise ConfigError('a forest needs at least one tree, got {0}'.format(trees))
        if depth < 1:
            raise ConfigError('tree depth must be >= 1, got {0}'.format(depth))
        self.trees = int(trees)
        self.depth = int(depth)
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.workers = workers
        self.models = []

    def params(self):
        return {'trees': self.trees, 'depth': self.depth,
                'max_features': self.max_features, 'bootstrap': self.bootstrap}

    def _fit(self, x, y, rng):
        max_features = self.max_features
        if max_features is None:
            max_features = int(math.ceil(x.shape[1] / 3.))
        self.models = []
        for j in range(y.shape[1]):
            forest = RandomForestRegressor(n_estimators=self.trees, max_depth=self.depth,
                                           max_features=min(max_features, x.shape[1]),
                                           bootstrap=self.bootstrap, n_jobs=self.workers,
                                           random_state=int(rng.integers(MAX_SEED)))
            forest.fit(x, y[:, j])
            self.models.append(forest)

    def _predict(self, x):
        return np.column_stack([m.predict(x) for m in self.models])


class PerceptronLearner(Learner):
    """ Single hidden layer network trained by per-sample gradient descent.

    Args:
        hidden_units: width of the hidden layer, 0 means a plain affine map
        activation: `tanh' or `identity'
        epochs: passes over the training set
        step: fixed learning rate

    Loss is half the mean squared error over samples and outputs summed.
    With no hidden layer and the identity activation the exact least
    squares solution is used instead of gradient descent.

    """
    kind = 'mlp'

    def __init__(self, hidden_units=30, activation='tanh', epochs=30, step=0.01):
        super(PerceptronLearner, self).__init__()
        if activation not in ACTIVATIONS:
            raise ConfigError('unknown activation {0}, valid: {1}'.format(activation,
                                                                         ', '.join(ACTIVATIONS)))
        if hidden_units < 0 or (hidden_units == 0 and activation != 'identity'):
            raise ConfigError('hidden units must be >= 1, got {0}'.format(hidden_units))
        if epochs < 1 or not step > 0:
            raise ConfigError('epochs must be >= 1 and step > 0')
        self.hidden_units = int(hidden_units)
        self.activation = activation
        self.epochs = int(epochs)
        self.step = float(step)
        self.shapes = None
        self.weights = None

    def params(self):
        return {'hidden_units': self.hidden_units, 'activation': self.activation,
                'epochs': self.epochs, 'step': self.step}

    def layer_shapes(self, n_in, n_out):
        """ Shapes of the parameter blocks, in the flat vector order. """
        if self.hidden_units == 0:
            return [(n_in, n_out), (n_out,)]
        h = self.hidden_units
        return [(n_in, h), (h,), (h, n_out), (n_out,)]

    def _unpack(self, params):
        blocks, i = [], 0
        for shape in self.shapes:
            size = int(np.prod(shape))
            blocks.append(params[i:i + size].reshape(shape))
            i += size
        return blocks

    def _act(self, z):
        if self.activation == 'tanh':
            return np.tanh(z)
        return z

    def _act_prime(self, a):
        if self.activation == 'tanh':
            return 1. - a ** 2
        return np.ones_like(a)

    def _forward(self, params, x):
        blocks = self._unpack(params)
        if self.hidden_units == 0:
            w, b = blocks
            return x.dot(w) + b, None
        w1, b1, w2, b2 = blocks
        a = self._act(x.dot(w1) + b1)
        return a.dot(w2) + b2, a

    def loss_and_gradient(self, params, x, y):
        """ Loss and its gradient with respect to the flat parameter vector.

        `shapes' must be set, see `layer_shapes'.

        """
        m = x.shape[0]
        out, a = self._forward(params, x)
        err = out - y
        loss = 0.5 * np.sum(err ** 2) / m
        d_out = err / m
        if self.hidden_units == 0:
            grads = [x.T.dot(d_out), d_out.sum(axis=0)]
        else:
            w2 = self._unpack(params)[2]
            d_z = d_out.dot(w2.T) * self._act_prime(a)
            grads = [x.T.dot(d_z), d_z.sum(axis=0), a.T.dot(d_out), d_out.sum(axis=0)]
        return loss, np.concatenate([g.reshape(-1) for g in grads])

    def init_params(self, n_in, n_out, rng):
        """ Glorot-uniform weights, zero biases. """
        self.shapes = self.layer_shapes(n_in, n_out)
        blocks = []
        for shape in self.shapes:
            if len(shape) == 2:
                limit = np.sqrt(6. / sum(shape))
                blocks.append(rng.uniform(-limit, limit, size=shape).reshape(-1))
            else:
                blocks.append(np.zeros(shape))
        return np.concatenate(blocks)

    def _fit(self, x, y, rng):
        params = self.init_params(x.shape[1], y.shape[1], rng)
        if self.hidden_units == 0:
            design = np.hstack([x, np.ones((x.shape[0], 1))])
            coef = np.linalg.lstsq(design, y, rcond=None)[0]
            self.weights = np.concatenate([coef[:-1].reshape(-1), coef[-1]])
            return
        for epoch in range(self.epochs):
            for i in rng.permutation(x.shape[0]):
                _, grad = self.loss_and_gradient(params, x[i:i + 1], y[i:i + 1])
                params -= self.step * grad
            if varcast.DEBUG:
                loss, _ = self.loss_and_gradient(params, x, y)
                log.debug('epoch {0}: loss {1:.6f}'.format(epoch + 1, loss))
        self.weights = params

    def _predict(self, x):
        return self._forward(self.weights, x)[0]


LEARNERS = {'linear': LinearLearner,
            'forest': ForestLearner,
            'mlp': PerceptronLearner}


def make_learner(kind, **hyperparameters):
    """ Instantiate a learner by its registry name. """
    if kind not in LEARNERS:
        raise ConfigError('unknown learner {0}, valid names: {1}'.format(kind,
                                                                       ', '.join(sorted(LEARNERS))))
    return LEARNERS[kind](**hyperparameters)


def train(learner, dataset, seed=None):
    """ Train `learner' in place and return it. """
    return learner.train(dataset, seed)


def predict_one_step(learner, window):
    return learner.predict_one_step(window)


def rolling_predictions(learner, frame, split, w=None):
    """ One-step predictions over the test segment from true history.

    The window ending right before test sample t may reach back into the
    train segment. Returns N x test.L.

    """
    w = learner.w if w is None else w
    if w != learner.w:
        raise DataError('learner was trained with w={0}, got w={1}'.format(learner.w, w))
    if split.split_index < w:
        raise DataError('the train segment is shorter than the window ({0})'.format(w))
    dataset = make_windows(frame, w)
    return learner.predict(dataset.inputs[split.split_index - w:]).T
