"""Policy network: a small tanh MLP mapping features to yoke commands.

Implemented from scratch on numpy so the regression loss, the analytic
gradient, and the file format are fully auditable. The loss is the sum
over a batch of squared Euclidean distance between predicted and
recorded actions; the per-sample contributions are accumulated with
math.fsum, so the reported sum is exactly rounded (and exactly doubles
when a batch is duplicated).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import FEATURE_SCHEMA_ID, N_FEATURES, Sample
from .simulator import ControlInput

POLICY_FORMAT = "flighttutor-policy-v1"
LAYER_SIZES = (N_FEATURES, 32, 32, 2)


class SchemaMismatchError(Exception):
    """Feature schema or parameter shapes do not match the policy."""


@dataclass
class Policy:
    weights: list[np.ndarray]  # weights[i] has shape (sizes[i], sizes[i+1])
    biases: list[np.ndarray]
    feature_schema: str = FEATURE_SCHEMA_ID
    meta: dict = field(default_factory=dict)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def validate(self) -> None:
        if len(self.weights) != len(self.biases):
            raise SchemaMismatchError("weights/biases layer count mismatch")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise SchemaMismatchError(f"layer {i}: inconsistent shapes {w.shape}, {b.shape}")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise SchemaMismatchError(f"layer {i}: input width mismatch")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise SchemaMismatchError(f"layer {i}: non-finite parameters")

    def copy(self) -> "Policy":
        return Policy(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            feature_schema=self.feature_schema,
            meta=dict(self.meta),
        )


def init_policy(seed: int, layer_sizes: tuple[int, ...] = LAYER_SIZES) -> Policy:
    """Seeded init: uniform +-1/sqrt(fan_in) per layer."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Policy(weights=weights, biases=biases)


def forward_batch(policy: Policy, x: np.ndarray) -> np.ndarray:
    """Batched evaluation, x shape (n, n_features) -> (n, 2).

    tanh on every layer including the output, so actions are always
    strictly inside (-1, 1)."""
    if x.ndim != 2 or x.shape[1] != policy.weights[0].shape[0]:
        raise SchemaMismatchError(
            f"feature width {x.shape} does not match policy input {policy.weights[0].shape[0]}"
        )
    h = x
    for w, b in zip(policy.weights, policy.biases):
        h = np.tanh(h @ w + b)
    return h


def forward(policy: Policy, features) -> ControlInput:
    """Single-sample evaluation; output components are (yoke_pitch, yoke_roll)."""
    if len(features) != policy.weights[0].shape[0]:
        raise SchemaMismatchError(
            f"got {len(features)} features, policy expects {policy.weights[0].shape[0]}"
        )
    out = forward_batch(policy, np.asarray(features, dtype=np.float64).reshape(1, -1))[0]
    return ControlInput(float(out[0]), float(out[1]))


def squared_error_sum(pred: np.ndarray, target: np.ndarray) -> float:
    """Sum over rows of squared Euclidean distance, exactly rounded."""
    per_sample = np.sum((pred - target) ** 2, axis=1)
    return math.fsum(per_sample.tolist())


def _batch_arrays(batch: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    if not batch:
        raise ValueError("batch must be non-empty")
    x = np.array([s.features for s in batch], dtype=np.float64)
    y = np.array([(s.action.yoke_pitch, s.action.yoke_roll) for s in batch], dtype=np.float64)
    return x, y


def bc_loss(policy: Policy, batch: list[Sample]) -> float:
    """Imitation loss: sum over the batch of ||prediction - action||^2."""
    x, y = _batch_arrays(batch)
    return squared_error_sum(forward_batch(policy, x), y)


Gradient = list[tuple[np.ndarray, np.ndarray]]  # (dW, db) per layer


def grad_from_arrays(policy: Policy, x: np.ndarray, y: np.ndarray) -> Gradient:
    """Analytic gradient of the summed squared-error loss w.r.t. every
    weight and bias, by backpropagation through the tanh layers."""
    activations = [x]
    h = x
    for w, b in zip(policy.weights, policy.biases):
        h = np.tanh(h @ w + b)
        activations.append(h)

    out = activations[-1]
    delta = 2.0 * (out - y) * (1.0 - out * out)  # through the output tanh
    grads: Gradient = [None] * len(policy.weights)  # type: ignore[list-item]
    for i in range(len(policy.weights) - 1, -1, -1):
        grads[i] = (activations[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            h_prev = activations[i]
            delta = (delta @ policy.weights[i].T) * (1.0 - h_prev * h_prev)
    return grads


def bc_grad(policy: Policy, batch: list[Sample]) -> Gradient:
    x, y = _batch_arrays(batch)
    return grad_from_arrays(policy, x, y)


def save_policy(policy: Policy, path: str) -> None:
    policy.validate()
    doc = {
        "format": POLICY_FORMAT,
        "layer_sizes": list(policy.layer_sizes),
        "activation": "tanh",
        "feature_schema": policy.feature_schema,
        "weights": [w.tolist() for w in policy.weights],
        "biases": [b.tolist() for b in policy.biases],
        "meta": policy.meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"), allow_nan=False)
        fh.write("\n")


def load_policy(path: str, expect_schema: str | None = FEATURE_SCHEMA_ID) -> Policy:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != POLICY_FORMAT:
        raise SchemaMismatchError(f"{path}: unknown policy format {doc.get('format')!r}")
    if expect_schema is not None and doc.get("feature_schema") != expect_schema:
        raise SchemaMismatchError(
            f"{path}: feature schema {doc.get('feature_schema')!r} does not match {expect_schema!r}"
        )
    policy = Policy(
        weights=[np.array(w, dtype=np.float64) for w in doc["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in doc["biases"]],
        feature_schema=doc["feature_schema"],
        meta=doc.get("meta", {}),
    )
    sizes = doc.get("layer_sizes")
    if sizes is not None and tuple(sizes) != policy.layer_sizes:
        raise SchemaMismatchError(f"{path}: layer_sizes {sizes} do not match parameter shapes")
    policy.validate()
    return policy
