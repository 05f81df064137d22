"""Feedforward policy network trained with cross-entropy on (state, action) pairs.

:class:`PolicyNetwork` follows the scikit-learn estimator conventions
(``fit``/``partial_fit``/``predict_proba``, ``get_params``), and stores its
parameters as ``coefs_``/``intercepts_`` like :class:`sklearn.neural_network.MLPClassifier`.
The module-level functions expose the individual pieces of a training step.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

__all__ = [
    "PolicyNetwork",
    "TrainBatch",
    "DimMismatch",
    "EmptyBatch",
    "NonfiniteGradient",
    "forward",
    "ce_loss",
    "backward",
    "sgd_step",
    "save_checkpoint",
    "load_checkpoint",
]

PROB_FLOOR = 1e-12
CHECKPOINT_MAGIC = b"EXTREMAL-CEM-MLP v1\n"


class DimMismatch(ValueError):
    pass


class EmptyBatch(ValueError):
    pass


class NonfiniteGradient(FloatingPointError):
    pass


class TrainBatch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray


class PolicyNetwork(ClassifierMixin, BaseEstimator):
    """Dense ReLU network with a softmax head over the alphabet.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int, default=(128, 64, 4)
    learning_rate : float, default=0.005
        Step size of plain (optionally momentum) SGD.
    momentum : float, default=0.0
    batch_size : int, default=32
        Mini-batch size used by :meth:`partial_fit`.
    max_iter : int, default=1
        Passes over the data made by :meth:`fit`.
    random_state : int, Generator or None
        Seeds the Glorot-uniform initialisation and mini-batch shuffling.
    """

    def __init__(
        self,
        hidden_layer_sizes=(128, 64, 4),
        learning_rate=0.005,
        momentum=0.0,
        batch_size=32,
        max_iter=1,
        random_state=None,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.max_iter = max_iter
        self.random_state = random_state

    @property
    def layer_sizes(self) -> list[int]:
        check_is_fitted(self, "coefs_")
        return [self.coefs_[0].shape[0]] + [w.shape[1] for w in self.coefs_]

    def _rng(self) -> np.random.Generator:
        if not hasattr(self, "_rng_"):
            self._rng_ = np.random.default_rng(self.random_state)
        return self._rng_

    def initialize(self, n_features: int, classes) -> "PolicyNetwork":
        """Allocate fresh parameters for the given input width and class labels."""
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.classes_ = np.asarray(classes)
        sizes = [int(n_features), *map(int, self.hidden_layer_sizes), len(self.classes_)]
        rng = self._rng()
        self.coefs_, self.intercepts_ = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.coefs_.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.intercepts_.append(np.zeros(fan_out))
        self.n_features_in_ = int(n_features)
        self._velocity = None
        return self

    def _targets(self, y) -> np.ndarray:
        idx = np.searchsorted(self.classes_, y)
        if np.any(idx >= len(self.classes_)) or np.any(self.classes_[np.minimum(idx, len(self.classes_) - 1)] != y):
            raise ValueError("y contains labels not present in classes_")
        return idx

    def partial_fit(self, X, y, classes=None) -> "PolicyNetwork":
        """One shuffled pass of mini-batch SGD over ``(X, y)``."""
        X, y = check_X_y(X, y, dtype=np.float64)
        if not hasattr(self, "coefs_"):
            if classes is None:
                classes = np.unique(y)
            self.initialize(X.shape[1], classes)
        if X.shape[1] != self.n_features_in_:
            raise DimMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        targets = self._targets(y)
        order = self._rng().permutation(len(X))
        for start in range(0, len(X), self.batch_size):
            sel = order[start:start + self.batch_size]
            grads = backward(self, TrainBatch(X[sel], targets[sel]), encoded=True)
            sgd_step(self, grads, self.learning_rate)
        return self

    def fit(self, X, y, classes=None) -> "PolicyNetwork":
        for attr in ("coefs_", "intercepts_", "_rng_"):
            if hasattr(self, attr):
                delattr(self, attr)
        for _ in range(self.max_iter):
            self.partial_fit(X, y, classes=classes)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "coefs_")
        X = check_array(X, dtype=np.float64)
        return _forward_batch(self, X)[-1]

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward_batch(net: PolicyNetwork, X: np.ndarray) -> list[np.ndarray]:
    """Activations of every layer; the last entry holds the probabilities."""
    if X.shape[1] != net.coefs_[0].shape[0]:
        raise DimMismatch(f"expected {net.coefs_[0].shape[0]} features, got {X.shape[1]}")
    acts = [X]
    last = len(net.coefs_) - 1
    for i, (w, b) in enumerate(zip(net.coefs_, net.intercepts_)):
        z = acts[-1] @ w + b
        acts.append(_softmax(z) if i == last else np.maximum(z, 0.0))
    return acts


def forward(net: PolicyNetwork, state) -> np.ndarray:
    """Probability vector over the alphabet for a single state (or a batch)."""
    s = np.asarray(state, dtype=np.float64)
    if s.ndim == 1:
        return _forward_batch(net, s[None, :])[-1][0]
    return _forward_batch(net, s)[-1]


def _as_batch(net: PolicyNetwork, batch: TrainBatch, encoded: bool):
    states = np.asarray(batch.states, dtype=np.float64)
    if states.ndim == 1:
        states = states[None, :]
    if len(states) == 0:
        raise EmptyBatch("training batch is empty")
    actions = np.asarray(batch.actions)
    if len(actions) != len(states):
        raise ValueError("states and actions differ in length")
    if not encoded:
        actions = net._targets(actions)
    return states, actions.astype(np.intp)


def ce_loss(net: PolicyNetwork, batch: TrainBatch) -> float:
    """Mean of ``-log p(action | state)`` over the batch."""
    states, actions = _as_batch(net, batch, encoded=False)
    probs = _forward_batch(net, states)[-1]
    picked = np.maximum(probs[np.arange(len(actions)), actions], PROB_FLOOR)
    return float(-np.mean(np.log(picked)))


def backward(net: PolicyNetwork, batch: TrainBatch, *, encoded: bool = False):
    """Gradients of :func:`ce_loss` as ``(coef_grads, intercept_grads)``."""
    states, actions = _as_batch(net, batch, encoded=encoded)
    acts = _forward_batch(net, states)
    delta = acts[-1].copy()
    delta[np.arange(len(actions)), actions] -= 1.0
    delta /= len(actions)
    coef_grads = [None] * len(net.coefs_)
    intercept_grads = [None] * len(net.coefs_)
    for i in range(len(net.coefs_) - 1, -1, -1):
        coef_grads[i] = acts[i].T @ delta
        intercept_grads[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ net.coefs_[i].T) * (acts[i] > 0)
    return coef_grads, intercept_grads


def sgd_step(net: PolicyNetwork, grads, lr: float) -> PolicyNetwork:
    """In-place update ``params -= lr * grad`` (with momentum if configured)."""
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    coef_grads, intercept_grads = grads
    flat = list(coef_grads) + list(intercept_grads)
    if not all(np.all(np.isfinite(g)) for g in flat):
        raise NonfiniteGradient("gradient contains NaN or inf")
    params = list(net.coefs_) + list(net.intercepts_)
    mu = getattr(net, "momentum", 0.0) or 0.0
    if mu:
        if getattr(net, "_velocity", None) is None:
            net._velocity = [np.zeros_like(p) for p in params]
        for v, g in zip(net._velocity, flat):
            v *= mu
            v -= lr * g
        for p, v in zip(params, net._velocity):
            p += v
    else:
        for p, g in zip(params, flat):
            p -= lr * g
    return net


def save_checkpoint(net: PolicyNetwork, path) -> None:
    """Header line, layer-size line, then every parameter as little-endian float64."""
    sizes = net.layer_sizes
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(("sizes " + " ".join(map(str, sizes)) + "\n").encode("ascii"))
        fh.write(("classes " + " ".join(str(int(c)) for c in net.classes_) + "\n").encode("ascii"))
        for w, b in zip(net.coefs_, net.intercepts_):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_checkpoint(path, **params) -> PolicyNetwork:
    with open(path, "rb") as fh:
        if fh.readline() != CHECKPOINT_MAGIC:
            raise ValueError("not a policy checkpoint (bad header)")
        head = fh.readline().decode("ascii").split()
        if not head or head[0] != "sizes":
            raise ValueError("missing layer sizes")
        sizes = [int(x) for x in head[1:]]
        cls_line = fh.readline().decode("ascii").split()
        classes = np.array([int(x) for x in cls_line[1:]])
        payload = fh.read()
    expected = sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:])) * 8
    if len(payload) != expected:
        raise ValueError(f"checkpoint payload has {len(payload)} bytes, expected {expected}")
    net = PolicyNetwork(hidden_layer_sizes=tuple(sizes[1:-1]), **params)
    net.classes_ = classes
    net.n_features_in_ = sizes[0]
    net.coefs_, net.intercepts_ = [], []
    off = 0
    for a, b in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(payload, dtype="<f8", count=a * b, offset=off).reshape(a, b).astype(np.float64)
        off += a * b * 8
        bias = np.frombuffer(payload, dtype="<f8", count=b, offset=off).astype(np.float64)
        off += b * 8
        net.coefs_.append(w)
        net.intercepts_.append(bias)
    net._velocity = None
    return net


def n_parameters(sizes: Sequence[int]) -> int:
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
