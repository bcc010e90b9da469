"""
Feedforward regressor for item (or full-slate) long-term values

Rectifier hidden layers, identity output, trained on squared error with
hand-written backpropagation. A frozen copy serves as the label network
for bootstrapped targets.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.error_handling import (
    ConfigError,
    DimensionMismatchError,
    NumericalError,
    handle_numeric_errors,
)

logger = logging.getLogger(__name__)

OPTIMIZER_NAMES = ('sgd', 'adam')

Gradients = Tuple[List[np.ndarray], List[np.ndarray]]


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, 0.0)


class QNetwork:
    """
    Multilayer perceptron with a single scalar output

    Weights are stored as (fan_in, fan_out) matrices so a batch of row
    vectors X maps to X @ W + b.
    """

    def __init__(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise ConfigError("network needs one bias per weight matrix", key="qmodel.hidden_dims")
        for index, (w, b) in enumerate(zip(weights, biases)):
            if b.shape != (w.shape[1],):
                raise ConfigError(f"bias {index} shape {b.shape} does not match weights {w.shape}")
            if index and weights[index - 1].shape[1] != w.shape[0]:
                raise ConfigError(f"layer {index} input width does not match previous layer")
        if weights[-1].shape[1] != 1:
            raise ConfigError("output layer must have a single unit")
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]

    @classmethod
    def initialize(cls, layer_dims: Sequence[int], rng: np.random.Generator) -> 'QNetwork':
        """
        Uniform(+/- sqrt(6 / (fan_in + fan_out))) weights, zero biases

        Args:
            layer_dims: (input, hidden..., 1)
            rng: Random stream
        """
        _check_dims(layer_dims)
        weights = []
        biases = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, layer_dims: Sequence[int]) -> 'QNetwork':
        _check_dims(layer_dims)
        return cls(
            [np.zeros((i, o)) for i, o in zip(layer_dims[:-1], layer_dims[1:])],
            [np.zeros(o) for o in layer_dims[1:]],
        )

    @property
    def layer_dims(self) -> List[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    def copy(self) -> 'QNetwork':
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def _as_batch(self, x: np.ndarray) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(x, dtype=float))
        if batch.shape[-1] != self.input_width:
            raise DimensionMismatchError(self.input_width, batch.shape[-1])
        return batch

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        """
        Forward pass keeping what backpropagation needs

        Returns:
            Outputs (n,), layer inputs and hidden pre-activations
        """
        activation = self._as_batch(x)
        inputs = []
        pre_activations = []
        last = len(self.weights) - 1
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(activation)
            z = activation @ w + b
            if index < last:
                pre_activations.append(z)
                activation = relu(z)
            else:
                activation = z
        return activation[:, 0], inputs, pre_activations

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """
        Predictions for a (n, input_width) batch
        """
        return self.forward(x)[0]

    def predict(self, x: np.ndarray) -> float:
        """
        Prediction for a single feature vector
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionMismatchError(self.input_width, int(x.shape[-1]))
        return float(self.forward(x)[0][0])

    @handle_numeric_errors
    def gradients(self, x: np.ndarray, targets: np.ndarray) -> Tuple[float, Gradients]:
        """
        Loss 0.5 * mean((pred - target)^2) and its parameter gradients

        Args:
            x: Inputs, one row per sample (a single vector is allowed)
            targets: Regression targets, one per row
        """
        targets = np.atleast_1d(np.asarray(targets, dtype=float))
        if not np.all(np.isfinite(targets)):
            raise NumericalError("non-finite regression target")
        outputs, inputs, pre_activations = self.forward(x)
        if targets.shape != outputs.shape:
            raise DimensionMismatchError(outputs.shape[0], targets.shape[0])

        residual = outputs - targets
        n = residual.shape[0]
        loss = 0.5 * float(np.mean(residual ** 2))

        grad_w: List[np.ndarray] = [np.empty(0)] * len(self.weights)
        grad_b: List[np.ndarray] = [np.empty(0)] * len(self.biases)
        delta = residual[:, None] / n
        for index in range(len(self.weights) - 1, -1, -1):
            grad_w[index] = inputs[index].T @ delta
            grad_b[index] = delta.sum(axis=0)
            if index:
                delta = (delta @ self.weights[index].T) * relu_grad(pre_activations[index - 1])
        return loss, (grad_w, grad_b)

    def apply_gradients(self, grads: Gradients, lr: float) -> None:
        for w, b, gw, gb in zip(self.weights, self.biases, grads[0], grads[1]):
            w -= lr * gw
            b -= lr * gb

    def parameters(self) -> List[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]


class LabelNetwork:
    """
    Frozen snapshot of a QNetwork used for bootstrapped targets
    """

    def __init__(self, net: QNetwork):
        self._net = net.copy()
        for param in self._net.parameters():
            param.flags.writeable = False

    @property
    def layer_dims(self) -> List[int]:
        return self._net.layer_dims

    def predict(self, x: np.ndarray) -> float:
        return self._net.predict(x)

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        return self._net.predict_batch(x)


class Adam:
    """
    Adam update rule kept alongside the network it trains
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._moments: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None
        self._t = 0

    def step(self, net: QNetwork, grads: Gradients) -> None:
        flat = [g for pair in zip(grads[0], grads[1]) for g in pair]
        if self._moments is None:
            self._moments = [(np.zeros_like(g), np.zeros_like(g)) for g in flat]
        self._t += 1
        correction1 = 1.0 - self.beta1 ** self._t
        correction2 = 1.0 - self.beta2 ** self._t
        for param, grad, (m, v) in zip(net.parameters(), flat, self._moments):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad ** 2
            param -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


class SGD:
    """
    Plain gradient descent
    """

    def __init__(self, lr: float):
        self.lr = lr

    def step(self, net: QNetwork, grads: Gradients) -> None:
        net.apply_gradients(grads, self.lr)


def make_optimizer(name: str, lr: float) -> Union[SGD, Adam]:
    if lr <= 0:
        raise ConfigError("learning rate must be positive", key="qmodel.lr")
    if name == 'sgd':
        return SGD(lr)
    if name == 'adam':
        return Adam(lr)
    raise ConfigError(f"optimizer must be one of {OPTIMIZER_NAMES}, got {name!r}", key="qmodel.optimizer")


def clip_gradients(grads: Gradients, max_norm: Optional[float]) -> Gradients:
    """
    Rescale gradients so their global norm is at most max_norm
    """
    if max_norm is None:
        return grads
    norm = math.sqrt(sum(float(np.sum(g ** 2)) for g in grads[0] + grads[1]))
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return [g * scale for g in grads[0]], [g * scale for g in grads[1]]


def predict(net: Union[QNetwork, LabelNetwork], x: np.ndarray) -> float:
    return net.predict(x)


def sgd_step(net: QNetwork, x: np.ndarray, target: Union[float, np.ndarray], lr: float) -> Tuple[QNetwork, float]:
    """
    One plain gradient step on squared error, in place

    Args:
        net: Network to update
        x: Feature vector or batch of rows
        target: Scalar target or one per row
        lr: Learning rate

    Returns:
        The updated network and the loss before the step
    """
    if lr <= 0:
        raise ConfigError("learning rate must be positive", key="qmodel.lr")
    loss, grads = net.gradients(x, target)
    net.apply_gradients(grads, lr)
    return net, loss


def sync_label_network(net: QNetwork) -> LabelNetwork:
    return LabelNetwork(net)


def save_checkpoint(net: QNetwork, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write the network as an .npz archive

    Arrays W0, b0, W1, b1, ... in layer order plus a JSON string `meta`
    holding layer_dims and any caller metadata.
    """
    path = Path(path)
    payload = dict(meta or {})
    payload['layer_dims'] = net.layer_dims
    arrays = {}
    for index, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays[f"W{index}"] = w
        arrays[f"b{index}"] = b
    with open(path, 'wb') as f:
        np.savez(f, meta=np.array(json.dumps(payload, sort_keys=True)), **arrays)
    logger.info("Saved checkpoint %s (layers %s)", path, net.layer_dims)
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[QNetwork, Dict[str, Any]]:
    """
    Read a checkpoint written by save_checkpoint
    """
    with np.load(Path(path), allow_pickle=False) as archive:
        meta = json.loads(str(archive['meta']))
        layers = len(meta['layer_dims']) - 1
        weights = [archive[f"W{index}"] for index in range(layers)]
        biases = [archive[f"b{index}"] for index in range(layers)]
    return QNetwork(weights, biases), meta


def _check_dims(layer_dims: Sequence[int]) -> None:
    if len(layer_dims) < 2 or layer_dims[-1] != 1 or any(d < 1 for d in layer_dims):
        raise ConfigError(f"invalid layer dims {list(layer_dims)}", key="qmodel.hidden_dims")
