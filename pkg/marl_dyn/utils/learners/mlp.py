"""
Feedforward Q-network in plain numpy: forward pass, backpropagation and SGD.

Weights are stored as ``(fan_in, fan_out)`` matrices so a batch ``X`` of shape
``(n, fan_in)`` maps to ``X @ W + b``. Hidden layers use a rectifier and the
output layer is linear.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from marl_dyn.utils.exceptions import ContractViolationError


@dataclass
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ContractViolationError("weights and biases must pair up layer by layer")
        for index, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ContractViolationError(f"layer {index} has inconsistent shapes")
            if index and w.shape[0] != self.weights[index - 1].shape[1]:
                raise ContractViolationError(f"layer {index} does not match the previous layer")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases, strict=True))

    def flatten(self) -> np.ndarray:
        """Layer by layer: the weight matrix (row-major) then the bias vector."""
        parts = []
        for w, b in zip(self.weights, self.biases, strict=True):
            parts.extend((w.ravel(), b))
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, vector: np.ndarray, layer_sizes: Sequence[int]) -> "MlpParams":
        vector = np.asarray(vector, dtype=np.float64)
        expected = param_count(layer_sizes)
        if vector.shape != (expected,):
            raise ContractViolationError(
                f"flat vector has shape {vector.shape}, expected ({expected},)",
                operation="from_flat",
            )
        weights, biases, offset = [], [], 0
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:], strict=True):
            weights.append(vector[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out).copy())
            offset += fan_in * fan_out
            biases.append(vector[offset : offset + fan_out].copy())
            offset += fan_out
        return cls(weights, biases)

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def max_abs(self) -> float:
        return max(
            max(float(np.max(np.abs(w))), float(np.max(np.abs(b))))
            for w, b in zip(self.weights, self.biases, strict=True)
        )


@dataclass(frozen=True)
class DqnBatch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)


def param_count(layer_sizes: Sequence[int]) -> int:
    return sum(
        fan_in * fan_out + fan_out
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:], strict=True)
    )


def init_mlp(layer_sizes: Sequence[int], rng: np.random.Generator) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:], strict=True):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return MlpParams(weights, biases)


def _forward_cache(params: MlpParams, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    if x.shape[-1] != params.layer_sizes[0]:
        raise ContractViolationError(
            f"input has {x.shape[-1]} features, network expects {params.layer_sizes[0]}",
            operation="mlp_forward",
        )
    activations, pre_activations = [x], []
    last = len(params.weights) - 1
    for index, (w, b) in enumerate(zip(params.weights, params.biases, strict=True)):
        z = activations[-1] @ w + b
        pre_activations.append(z)
        activations.append(z if index == last else np.maximum(z, 0.0))
    return activations, pre_activations


def mlp_forward(params: MlpParams, state_encoding: np.ndarray) -> np.ndarray:
    x = np.asarray(state_encoding, dtype=np.float64)
    activations, _ = _forward_cache(params, x)
    return activations[-1]


def _td_targets(target: MlpParams, batch: DqnBatch, gamma: float) -> np.ndarray:
    next_q = mlp_forward(target, batch.next_states).max(axis=1)
    return batch.rewards + gamma * next_q * (~batch.terminals)


def dqn_loss_and_grad(
    online: MlpParams, target: MlpParams, batch: DqnBatch, gamma: float
) -> tuple[float, MlpParams]:
    """Mean squared TD error and its gradient with respect to the online parameters."""
    if len(batch) == 0:
        raise ContractViolationError("batch must not be empty", operation="dqn_update")

    n = len(batch)
    rows = np.arange(n)
    y = _td_targets(target, batch, gamma)
    activations, pre_activations = _forward_cache(online, np.asarray(batch.states, dtype=np.float64))
    td_error = y - activations[-1][rows, batch.actions]
    loss = float(np.mean(td_error**2))

    delta = np.zeros_like(activations[-1])
    delta[rows, batch.actions] = -2.0 * td_error / n
    grad_w: list[np.ndarray] = [np.empty(0)] * len(online.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(online.weights)
    for layer in range(len(online.weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ online.weights[layer].T) * (pre_activations[layer - 1] > 0.0)
    return loss, MlpParams(grad_w, grad_b)


def dqn_loss(online: MlpParams, target: MlpParams, batch: DqnBatch, gamma: float) -> float:
    if len(batch) == 0:
        raise ContractViolationError("batch must not be empty", operation="dqn_loss")
    q = mlp_forward(online, batch.states)[np.arange(len(batch)), batch.actions]
    return float(np.mean((_td_targets(target, batch, gamma) - q) ** 2))


def dqn_update(
    online: MlpParams, target: MlpParams, batch: DqnBatch, learning_rate: float, gamma: float
) -> tuple[MlpParams, float]:
    """One plain gradient-descent step on the online network; target is left untouched."""
    loss, grads = dqn_loss_and_grad(online, target, batch, gamma)
    updated = MlpParams(
        [w - learning_rate * g for w, g in zip(online.weights, grads.weights, strict=True)],
        [b - learning_rate * g for b, g in zip(online.biases, grads.biases, strict=True)],
    )
    return updated, loss


def sync_target(online: MlpParams, target: MlpParams, every_k: int, h: int) -> MlpParams:
    if every_k < 1:
        raise ContractViolationError(f"every_k must be >= 1, got {every_k}", operation="sync_target")
    if h % every_k == 0:
        return online.copy()
    return target
