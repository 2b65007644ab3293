"""Recurrent next-token model: embedding, RNN/GRU cell, softmax output.

All math works on row vectors: ``x @ W`` with W shaped (inputs, outputs).
Batched functions take contexts as an int array of shape (batch, length);
every row in a batch has the same length, so no padding enters the math.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Protocol, Sequence

import numpy as np

from .errors import DimensionError, DivergenceError, StaleCacheError

CellKind = Literal["rnn", "gru"]

TENSOR_ORDER: dict[str, tuple[str, ...]] = {
    "gru": ("E", "W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h", "W_o", "b_o"),
    "rnn": ("E", "W", "U", "b", "W_o", "b_o"),
}
CELL_BIASES = frozenset({"b_z", "b_r", "b_h", "b"})
PROB_FLOOR = 1e-12
_LN2 = math.log(2.0)


@dataclass(slots=True)
class ModelParams:
    cell_kind: CellKind
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    tensors: dict[str, np.ndarray]
    use_bias: bool = True
    version: int = 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    @property
    def tensor_names(self) -> tuple[str, ...]:
        return TENSOR_ORDER[self.cell_kind]

    def expected_shape(self, name: str) -> tuple[int, ...]:
        V, D, H = self.vocab_size, self.embed_dim, self.hidden_dim
        if name == "E":
            return (V, D)
        if name == "W_o":
            return (H, V)
        if name == "b_o":
            return (V,)
        if name.startswith("W"):
            return (D, H)
        if name.startswith("U"):
            return (H, H)
        return (H,)

    def copy(self) -> "ModelParams":
        return ModelParams(
            cell_kind=self.cell_kind,
            vocab_size=self.vocab_size,
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
            tensors={name: arr.copy() for name, arr in self.tensors.items()},
            use_bias=self.use_bias,
            version=self.version,
        )

    def check(self) -> None:
        for name in self.tensor_names:
            if name not in self.tensors:
                raise DimensionError(f"missing tensor {name}")
            shape = self.expected_shape(name)
            if self.tensors[name].shape != shape:
                raise DimensionError(f"tensor {name} has shape {self.tensors[name].shape}, expected {shape}")

    def predict_proba(self, contexts: np.ndarray) -> np.ndarray:
        probs, _ = forward_batch(contexts, self)
        return probs


@dataclass(slots=True)
class HiddenState:
    h: np.ndarray


@dataclass(slots=True)
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(slots=True)
class ForwardCache:
    ids: np.ndarray
    inputs: list[np.ndarray]
    steps: list[tuple[np.ndarray, ...]]
    h_final: np.ndarray
    mask: np.ndarray | None
    probs: np.ndarray
    params_id: int
    version: int


class ExampleLike(Protocol):
    context: Sequence[int]
    target: int


def init_params(
    vocab_size: int,
    embed_dim: int,
    hidden_dim: int,
    cell_kind: CellKind = "gru",
    seed: int = 0,
    use_bias: bool = True,
) -> ModelParams:
    """Glorot-uniform weights from a seeded generator, zero biases."""

    if min(vocab_size, embed_dim, hidden_dim) <= 0:
        raise DimensionError("model dimensions must be positive")
    if cell_kind not in TENSOR_ORDER:
        raise DimensionError(f"unknown cell kind {cell_kind!r}")
    params = zero_params(vocab_size, embed_dim, hidden_dim, cell_kind, use_bias)
    rng = np.random.default_rng(seed)
    for name in params.tensor_names:
        shape = params.expected_shape(name)
        if len(shape) == 2:
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            params.tensors[name] = rng.uniform(-limit, limit, size=shape)
    return params


def zero_params(
    vocab_size: int,
    embed_dim: int,
    hidden_dim: int,
    cell_kind: CellKind = "gru",
    use_bias: bool = True,
) -> ModelParams:
    params = ModelParams(cell_kind, vocab_size, embed_dim, hidden_dim, tensors={}, use_bias=use_bias)
    for name in params.tensor_names:
        params.tensors[name] = np.zeros(params.expected_shape(name), dtype=np.float64)
    return params


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """Logistic function, branching on sign so large |x| never overflows."""

    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def _bias(params: ModelParams, name: str) -> np.ndarray | float:
    return params.tensors[name] if params.use_bias else 0.0


def _as_state(h_prev: HiddenState | np.ndarray) -> np.ndarray:
    return h_prev.h if isinstance(h_prev, HiddenState) else np.asarray(h_prev, dtype=np.float64)


def _check_step_shapes(x: np.ndarray, h: np.ndarray, params: ModelParams) -> None:
    if x.shape[-1] != params.embed_dim:
        raise DimensionError(f"input has size {x.shape[-1]}, expected {params.embed_dim}")
    if h.shape[-1] != params.hidden_dim:
        raise DimensionError(f"state has size {h.shape[-1]}, expected {params.hidden_dim}")


def _rnn_forward_step(x: np.ndarray, h: np.ndarray, params: ModelParams) -> tuple[np.ndarray, tuple]:
    t = params.tensors
    h_new = np.tanh(x @ t["W"] + h @ t["U"] + _bias(params, "b"))
    return h_new, (x, h, h_new)


def _gru_forward_step(x: np.ndarray, h: np.ndarray, params: ModelParams) -> tuple[np.ndarray, tuple]:
    t = params.tensors
    z = sigmoid(x @ t["W_z"] + h @ t["U_z"] + _bias(params, "b_z"))
    r = sigmoid(x @ t["W_r"] + h @ t["U_r"] + _bias(params, "b_r"))
    rh = r * h
    cand = np.tanh(x @ t["W_h"] + rh @ t["U_h"] + _bias(params, "b_h"))
    h_new = (1.0 - z) * h + z * cand
    return h_new, (x, h, z, r, rh, cand)


def rnn_step(x: np.ndarray, h_prev: HiddenState | np.ndarray, params: ModelParams) -> HiddenState:
    x = np.asarray(x, dtype=np.float64)
    h = _as_state(h_prev)
    _check_step_shapes(x, h, params)
    return HiddenState(_rnn_forward_step(x, h, params)[0])


def gru_step(x: np.ndarray, h_prev: HiddenState | np.ndarray, params: ModelParams) -> HiddenState:
    x = np.asarray(x, dtype=np.float64)
    h = _as_state(h_prev)
    _check_step_shapes(x, h, params)
    return HiddenState(_gru_forward_step(x, h, params)[0])


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def forward_batch(
    contexts: np.ndarray | Sequence[Sequence[int]],
    params: ModelParams,
    training: bool = False,
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    ids = np.asarray(contexts, dtype=np.int64)
    if ids.ndim != 2 or ids.shape[1] < 1:
        raise DimensionError("contexts must be a (batch, length >= 1) id array")
    if ids.min() < 0 or ids.max() >= params.vocab_size:
        raise DimensionError(f"token id outside [0, {params.vocab_size})")

    step = _gru_forward_step if params.cell_kind == "gru" else _rnn_forward_step
    E = params.tensors["E"]
    h = np.zeros((ids.shape[0], params.hidden_dim), dtype=np.float64)
    inputs: list[np.ndarray] = []
    steps: list[tuple] = []
    for pos in range(ids.shape[1]):
        x = E[ids[:, pos]]
        h, cache = step(x, h, params)
        inputs.append(x)
        steps.append(cache)

    mask = dropout_mask if training else None
    h_out = h * mask if mask is not None else h
    probs = softmax(h_out @ params.tensors["W_o"] + params.tensors["b_o"])
    return probs, ForwardCache(ids, inputs, steps, h, mask, probs, id(params), params.version)


def forward(
    context: Sequence[int],
    params: ModelParams,
    training: bool = False,
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    if len(context) < 1:
        raise DimensionError("context must hold at least one token")
    mask = None if dropout_mask is None else np.asarray(dropout_mask, dtype=np.float64).reshape(1, -1)
    probs, cache = forward_batch([list(context)], params, training, mask)
    return probs[0], cache


def loss(probs: np.ndarray, target: int) -> float:
    """Cross-entropy in bits for one example."""

    return float(-math.log2(max(float(probs[target]), PROB_FLOOR)))


def batch_losses(probs: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    picked = probs[np.arange(len(targets)), np.asarray(targets, dtype=np.int64)]
    return -np.log2(np.maximum(picked, PROB_FLOOR))


def _rnn_backward_step(dh_new: np.ndarray, cache: tuple, params: ModelParams, grads: dict) -> tuple:
    x, h, h_new = cache
    t = params.tensors
    da = dh_new * (1.0 - h_new**2)
    grads["W"] += x.T @ da
    grads["U"] += h.T @ da
    grads["b"] += da.sum(axis=0)
    return da @ t["W"].T, da @ t["U"].T


def _gru_backward_step(dh_new: np.ndarray, cache: tuple, params: ModelParams, grads: dict) -> tuple:
    x, h, z, r, rh, cand = cache
    t = params.tensors
    dcand = dh_new * z
    dz = dh_new * (cand - h)
    dh = dh_new * (1.0 - z)

    da_h = dcand * (1.0 - cand**2)
    grads["W_h"] += x.T @ da_h
    grads["U_h"] += rh.T @ da_h
    grads["b_h"] += da_h.sum(axis=0)
    dx = da_h @ t["W_h"].T
    drh = da_h @ t["U_h"].T
    dh += drh * r

    da_r = drh * h * r * (1.0 - r)
    grads["W_r"] += x.T @ da_r
    grads["U_r"] += h.T @ da_r
    grads["b_r"] += da_r.sum(axis=0)
    dx += da_r @ t["W_r"].T
    dh += da_r @ t["U_r"].T

    da_z = dz * z * (1.0 - z)
    grads["W_z"] += x.T @ da_z
    grads["U_z"] += h.T @ da_z
    grads["b_z"] += da_z.sum(axis=0)
    dx += da_z @ t["W_z"].T
    dh += da_z @ t["U_z"].T
    return dx, dh


def backward_batch(cache: ForwardCache, targets: Sequence[int], params: ModelParams) -> dict[str, np.ndarray]:
    """Gradients of the batch-mean loss (bits) for every tensor, by BPTT."""

    if cache.params_id != id(params) or cache.version != params.version:
        raise StaleCacheError("forward cache was produced by different parameters")
    targets_arr = np.asarray(targets, dtype=np.int64)
    batch = cache.probs.shape[0]
    if targets_arr.shape != (batch,):
        raise DimensionError(f"expected {batch} targets, got {targets_arr.shape}")

    grads = {name: np.zeros_like(params.tensors[name]) for name in params.tensor_names}

    dlogits = cache.probs.copy()
    dlogits[np.arange(batch), targets_arr] -= 1.0
    dlogits /= _LN2 * batch

    h_out = cache.h_final * cache.mask if cache.mask is not None else cache.h_final
    grads["W_o"] += h_out.T @ dlogits
    grads["b_o"] += dlogits.sum(axis=0)
    dh = dlogits @ params.tensors["W_o"].T
    if cache.mask is not None:
        dh = dh * cache.mask

    step_back = _gru_backward_step if params.cell_kind == "gru" else _rnn_backward_step
    for pos in range(len(cache.steps) - 1, -1, -1):
        dx, dh = step_back(dh, cache.steps[pos], params, grads)
        np.add.at(grads["E"], cache.ids[:, pos], dx)

    if not params.use_bias:
        for name in CELL_BIASES.intersection(grads):
            grads[name][...] = 0.0
    return grads


def backward(cache: ForwardCache, target: int, params: ModelParams) -> dict[str, np.ndarray]:
    return backward_batch(cache, [target], params)


def adam_update(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam step applied in place to ``params``."""

    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(f"non-finite gradient for tensor {name}")

    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for name in params.tensor_names:
        grad = grads.get(name)
        if grad is None:
            continue
        if name not in state.m:
            state.m[name] = np.zeros_like(params.tensors[name])
            state.v[name] = np.zeros_like(params.tensors[name])
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)
        m_hat = m / bc1
        v_hat = v / bc2
        params.tensors[name] -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    params.version += 1
    return params, state


def grad_check(
    params: ModelParams,
    example: ExampleLike,
    epsilon: float = 1e-5,
    max_coords: int = 200,
    seed: int = 0,
) -> float:
    """Largest relative gap between analytic and central-difference gradients."""

    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    for name in params.tensor_names:
        if params.tensors[name].dtype != np.float64:
            raise ValueError(f"grad_check needs float64 tensors, {name} is {params.tensors[name].dtype}")

    context = list(example.context)
    target = int(example.target)
    probs, cache = forward(context, params)
    analytic = backward(cache, target, params)
    rng = np.random.default_rng(seed)

    worst = 0.0
    for name in params.tensor_names:
        if not params.use_bias and name in CELL_BIASES:
            continue
        arr = params.tensors[name]
        flat = arr.reshape(-1)
        if flat.size <= max_coords:
            coords = np.arange(flat.size)
        else:
            coords = rng.choice(flat.size, size=max_coords, replace=False)
        grad_flat = analytic[name].reshape(-1)
        for coord in coords:
            original = flat[coord]
            flat[coord] = original + epsilon
            plus = loss(forward(context, params)[0], target)
            flat[coord] = original - epsilon
            minus = loss(forward(context, params)[0], target)
            flat[coord] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            a = grad_flat[coord]
            denom = max(abs(a) + abs(numeric), 1e-5)
            worst = max(worst, abs(a - numeric) / denom)
    return worst
