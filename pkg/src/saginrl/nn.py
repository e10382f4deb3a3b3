"""Small fully connected networks with hand-written backprop and Adam.

Parameters live in :class:`saginrl.params.ParamSet` as alternating
(weight, bias) tensors per layer. Hidden layers use tanh; the output
layer is affine and its "head" tag only records how consumers interpret
it (logits vs. values).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .params import ParamSet

LOG_PROB_FLOOR = -30.0  # clamp for log-probabilities fed into entropy terms


class DimensionError(ValueError):
    """Raised when an input or upstream vector does not match the NetSpec."""


@dataclass(frozen=True)
class NetSpec:
    in_dim: int
    hidden: tuple[int, ...]
    out_dim: int
    head: str = "values"  # "values" | "logits"

    def __post_init__(self) -> None:
        dims = (self.in_dim, *self.hidden, self.out_dim)
        if any(d < 1 for d in dims):
            raise DimensionError("all layer dims must be >= 1")
        if self.head not in ("values", "logits"):
            raise DimensionError(f"unknown head {self.head!r}")

    @cached_property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = (self.in_dim, *self.hidden, self.out_dim)
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]


def init_params(spec: NetSpec, rng: np.random.Generator) -> ParamSet:
    """Xavier-uniform weights, zero biases, as float32."""
    tensors: list[np.ndarray] = []
    for fan_in, fan_out in spec.layer_dims:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        tensors.append(w.astype(np.float32))
        tensors.append(np.zeros(fan_out, dtype=np.float32))
    return ParamSet(tuple(tensors))


def _tensors(params) -> tuple[np.ndarray, ...]:
    """Accept a ParamSet or any plain sequence of arrays (e.g. float64 copies)."""
    return params.tensors if hasattr(params, "tensors") else tuple(params)


def _check_input(spec: NetSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 1:
        if x.shape[0] != spec.in_dim:
            raise DimensionError(f"input dim {x.shape[0]} != {spec.in_dim}")
        return x[None, :]
    if x.ndim == 2:
        if x.shape[1] != spec.in_dim:
            raise DimensionError(f"input dim {x.shape[1]} != {spec.in_dim}")
        return x
    raise DimensionError("input must be a vector or a batch of vectors")


def forward(spec: NetSpec, params, x: np.ndarray) -> np.ndarray:
    """Evaluate the network; accepts a single vector or a batch."""
    single = np.asarray(x).ndim == 1
    out = forward_cached(spec, params, x)[0]
    return out[0] if single else out


def forward_cached(spec: NetSpec, params, x: np.ndarray):
    """Forward pass keeping the per-layer activations needed for backprop."""
    tensors = _tensors(params)
    if len(tensors) != 2 * len(spec.layer_dims):
        raise DimensionError("ParamSet does not match NetSpec layer count")
    h = _check_input(spec, x)
    acts = [h]  # activations entering each layer
    n_layers = len(spec.layer_dims)
    for i in range(n_layers):
        w, b = tensors[2 * i], tensors[2 * i + 1]
        if w.shape != spec.layer_dims[i]:
            raise DimensionError("weight shape does not match NetSpec")
        z = h @ w + b
        h = np.tanh(z) if i < n_layers - 1 else z
        acts.append(h)
    return h, acts


def backward(spec: NetSpec, params, acts: list[np.ndarray],
             upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Backprop ``upstream`` (d loss / d output) through cached activations.

    Returns (per-parameter gradients in ParamSet order, gradient w.r.t. the
    input batch). Gradients are summed over the batch.
    """
    tensors = _tensors(params)
    n_layers = len(spec.layer_dims)
    up = np.asarray(upstream)
    if up.ndim == 1:
        up = up[None, :]
    if up.shape != acts[-1].shape:
        raise DimensionError("upstream shape does not match the output")
    grads: list[np.ndarray] = [None] * (2 * n_layers)  # type: ignore[list-item]
    delta = up
    for i in range(n_layers - 1, -1, -1):
        w = tensors[2 * i]
        if i < n_layers - 1:
            delta = delta * (1.0 - acts[i + 1] ** 2)  # through tanh
        grads[2 * i] = acts[i].T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        delta = delta @ w.T
    return grads, delta


def grad(spec: NetSpec, params: ParamSet, x: np.ndarray, upstream: np.ndarray) -> ParamSet:
    """Exact analytic gradient of ``upstream . forward(x)`` w.r.t. every parameter."""
    _, acts = forward_cached(spec, params, x)
    grads, _ = backward(spec, params, acts, upstream)
    return ParamSet(tuple(np.asarray(g, dtype=np.float32) for g in grads))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for stability."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax, clamped at LOG_PROB_FLOOR."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    return np.maximum(logp, LOG_PROB_FLOOR)


@dataclass
class AdamState:
    """First/second moment accumulators for one ParamSet."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def zeros(cls, params: ParamSet) -> "AdamState":
        return cls(step=0,
                   m=[np.zeros(t.shape, dtype=np.float32) for t in params.tensors],
                   v=[np.zeros(t.shape, dtype=np.float32) for t in params.tensors])


def adam_step(params, grads, lr: float, state: AdamState,
              beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> tuple[ParamSet, AdamState]:
    """One adaptive-moment update. Returns new params and new state.

    ``grads`` may be a ParamSet or a plain sequence of arrays with the
    same shapes.
    """
    p_tensors = _tensors(params)
    g_tensors = _tensors(grads)
    if tuple(g.shape for g in g_tensors) != tuple(p.shape for p in p_tensors):
        raise DimensionError("gradient shapes do not match parameters")
    t = state.step + 1
    new_m, new_v, new_p = [], [], []
    bc1 = np.float32(1.0 - beta1 ** t)
    bc2 = np.float32(1.0 - beta2 ** t)
    b1 = np.float32(beta1)
    b2 = np.float32(beta2)
    c1 = np.float32(1.0 - beta1)
    c2 = np.float32(1.0 - beta2)
    lr32 = np.float32(lr)
    eps32 = np.float32(eps)
    for p, g, m, v in zip(p_tensors, g_tensors, state.m, state.v):
        g = np.asarray(g, dtype=np.float32)
        m2 = b1 * m
        m2 += c1 * g
        v2 = b2 * v
        v2 += c2 * (g * g)
        denom = np.sqrt(v2 / bc2)
        denom += eps32
        upd = (lr32 / bc1) * m2
        upd /= denom
        new_m.append(m2)
        new_v.append(v2)
        new_p.append(p - upd)
    return ParamSet(tuple(new_p)), AdamState(step=t, m=new_m, v=new_v)
