"""Differentiable primitives.

Every public function computes its result with numpy, wraps it in a
``Tensor``, and — when a tape is active and any input requires gradients —
records a ``Node`` whose ``backward_fn`` closes over the forward values it
needs.  The primitive set is intentionally small and closed; composite
layers are built from these and nothing else, so a gradient check that
covers the primitives covers the whole model family.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ShapeError
from .tensor import Node, Tensor, active_tape, as_array

__all__ = [
    "wrap", "constant",
    "add", "sub", "mul", "div", "neg",
    "matmul", "transpose", "reshape", "concat", "slice_axis",
    "sum_", "exp", "log", "sqrt", "tanh", "sigmoid",
    "softmax", "logsumexp", "layer_norm", "embedding",
]


def wrap(value) -> Tensor:
    """Pass tensors through; wrap scalars/arrays as constant tensors."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


def constant(value, name: str | None = None) -> Tensor:
    return Tensor(value, requires_grad=False, name=name)


def _record(op: str, inputs: Sequence[Tensor], out_data: np.ndarray, backward_fn) -> Tensor:
    requires = any(t.requires_grad for t in inputs)
    out = Tensor(out_data, requires_grad=requires)
    tape = active_tape()
    if tape is not None and requires:
        tape.record(Node(op, inputs, out, backward_fn))
    return out


def _check_suffix_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    """Allow equal shapes or one shape being a suffix of the other."""
    sa, sb = a.data.shape, b.data.shape
    if sa == sb:
        return
    small, big = (sa, sb) if len(sa) <= len(sb) else (sb, sa)
    if len(small) == len(big) or (len(small) > 0 and big[len(big) - len(small):] != small):
        raise ShapeError(f"{op}: shapes {sa} and {sb} are not equal and neither "
                         f"is a trailing suffix of the other")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient over the leading axes added by suffix-broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    return grad.sum(axis=tuple(range(extra)))


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_suffix_broadcast("add", a, b)
    out = a.data + b.data

    def backward_fn(g):
        ga = _unbroadcast(g, a.data.shape) if a.requires_grad else None
        gb = _unbroadcast(g, b.data.shape) if b.requires_grad else None
        return ga, gb

    return _record("add", (a, b), out, backward_fn)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_suffix_broadcast("sub", a, b)
    out = a.data - b.data

    def backward_fn(g):
        ga = _unbroadcast(g, a.data.shape) if a.requires_grad else None
        gb = _unbroadcast(-g, b.data.shape) if b.requires_grad else None
        return ga, gb

    return _record("sub", (a, b), out, backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_suffix_broadcast("mul", a, b)
    out = a.data * b.data
    a_data, b_data = a.data, b.data

    def backward_fn(g):
        ga = _unbroadcast(g * b_data, a_data.shape) if a.requires_grad else None
        gb = _unbroadcast(g * a_data, b_data.shape) if b.requires_grad else None
        return ga, gb

    return _record("mul", (a, b), out, backward_fn)


def div(a: Tensor, b: Tensor) -> Tensor:
    _check_suffix_broadcast("div", a, b)
    out = a.data / b.data
    a_data, b_data = a.data, b.data

    def backward_fn(g):
        ga = _unbroadcast(g / b_data, a_data.shape) if a.requires_grad else None
        gb = (_unbroadcast(-g * a_data / (b_data * b_data), b_data.shape)
              if b.requires_grad else None)
        return ga, gb

    return _record("div", (a, b), out, backward_fn)


def neg(a: Tensor) -> Tensor:
    def backward_fn(g):
        return (-g,)

    return _record("neg", (a,), -a.data, backward_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product.

    Supported shapes: ``(m,k) @ (k,n)``; batched-left ``(..., m, k) @ (k, n)``;
    and fully batched ``(..., m, k) @ (..., k, n)`` with identical leading dims.
    """
    sa, sb = a.data.shape, b.data.shape
    if len(sa) < 2 or len(sb) < 2:
        raise ShapeError(f"matmul: operands must be at least 2-D, got {sa} and {sb}")
    if sa[-1] != sb[-2]:
        raise ShapeError(f"matmul: inner dimensions differ, {sa} @ {sb}")
    if len(sb) == 2:
        pass  # (..., m, k) @ (k, n)
    elif sa[:-2] != sb[:-2]:
        raise ShapeError(f"matmul: batch dimensions differ, {sa} @ {sb}")

    out = a.data @ b.data
    a_data, b_data = a.data, b.data

    def backward_fn(g):
        ga = gb = None
        if a.requires_grad:
            ga = g @ np.swapaxes(b_data, -1, -2)
        if b.requires_grad:
            if b_data.ndim == 2 and a_data.ndim > 2:
                k = a_data.shape[-1]
                n = g.shape[-1]
                gb = a_data.reshape(-1, k).T @ g.reshape(-1, n)
            else:
                gb = np.swapaxes(a_data, -1, -2) @ g
        return ga, gb

    return _record("matmul", (a, b), out, backward_fn)


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(a.data.ndim)):
        raise ShapeError(f"transpose: axes {axes} are not a permutation for ndim {a.data.ndim}")
    inverse = tuple(int(i) for i in np.argsort(axes))

    def backward_fn(g):
        return (np.ascontiguousarray(np.transpose(g, inverse)),)

    return _record("transpose", (a,), np.ascontiguousarray(np.transpose(a.data, axes)), backward_fn)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(int(s) for s in shape)
    original = a.data.shape
    try:
        out = a.data.reshape(shape)
    except ValueError as exc:
        raise ShapeError(f"reshape: cannot reshape {original} to {shape}") from exc

    def backward_fn(g):
        return (g.reshape(original),)

    return _record("reshape", (a,), out, backward_fn)


def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    if not tensors:
        raise ShapeError("concat: need at least one tensor")
    ndim = tensors[0].data.ndim
    axis = axis % ndim
    for t in tensors[1:]:
        if t.data.ndim != ndim:
            raise ShapeError("concat: rank mismatch")
        for d in range(ndim):
            if d != axis and t.data.shape[d] != tensors[0].data.shape[d]:
                raise ShapeError(f"concat: shape mismatch off-axis: "
                                 f"{t.data.shape} vs {tensors[0].data.shape}")
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward_fn(g):
        pieces = []
        for i, t in enumerate(tensors):
            if t.requires_grad:
                sl = [slice(None)] * ndim
                sl[axis] = slice(int(bounds[i]), int(bounds[i + 1]))
                pieces.append(np.ascontiguousarray(g[tuple(sl)]))
            else:
                pieces.append(None)
        return tuple(pieces)

    return _record("concat", tuple(tensors), out, backward_fn)


def slice_axis(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    ndim = a.data.ndim
    axis = axis % ndim
    length = a.data.shape[axis]
    if not (0 <= start <= stop <= length):
        raise ShapeError(f"slice_axis: [{start}:{stop}] out of bounds for axis "
                         f"{axis} of length {length}")
    sl = [slice(None)] * ndim
    sl[axis] = slice(start, stop)
    sl = tuple(sl)
    out = np.ascontiguousarray(a.data[sl])
    in_shape = a.data.shape

    def backward_fn(g):
        full = np.zeros(in_shape, dtype=np.float64)
        full[sl] = g
        return (full,)

    return _record("slice_axis", (a,), out, backward_fn)


def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        axes = tuple(range(a.data.ndim))
    elif isinstance(axis, int):
        axes = (axis % max(a.data.ndim, 1),)
    else:
        axes = tuple(ax % a.data.ndim for ax in axis)
    out = a.data.sum(axis=axes if a.data.ndim else None, keepdims=keepdims)
    in_shape = a.data.shape

    def backward_fn(g):
        expanded = g
        if not keepdims and in_shape:
            grad_shape = list(in_shape)
            for ax in axes:
                grad_shape[ax] = 1
            expanded = g.reshape(grad_shape)
        return (np.broadcast_to(expanded, in_shape).copy() if in_shape else np.asarray(expanded),)

    return _record("sum", (a,), np.asarray(out), backward_fn)


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)

    def backward_fn(g):
        return (g * out,)

    return _record("exp", (a,), out, backward_fn)


def log(a: Tensor) -> Tensor:
    a_data = a.data

    def backward_fn(g):
        return (g / a_data,)

    return _record("log", (a,), np.log(a.data), backward_fn)


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)

    def backward_fn(g):
        return (g * (0.5 / out),)

    return _record("sqrt", (a,), out, backward_fn)


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)

    def backward_fn(g):
        return (g * (1.0 - out * out),)

    return _record("tanh", (a,), out, backward_fn)


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-a.data))

    def backward_fn(g):
        return (g * out * (1.0 - out),)

    return _record("sigmoid", (a,), out, backward_fn)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward_fn(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return _record("softmax", (a,), out, backward_fn)


def logsumexp(a: Tensor, axis: int = -1, keepdims: bool = False) -> Tensor:
    """log(sum(exp(a))) with the max subtracted for stability.

    The subtracted max is treated as a constant, which leaves the exact
    gradient: d(logsumexp)/da = softmax(a).
    """
    m = a.data.max(axis=axis, keepdims=True)
    e = np.exp(a.data - m)
    s = e.sum(axis=axis, keepdims=True)
    out = m + np.log(s)
    soft = e / s
    if not keepdims:
        out = np.squeeze(out, axis=axis)
    in_ndim = a.data.ndim

    def backward_fn(g):
        expanded = g if keepdims else np.expand_dims(g, axis % in_ndim)
        return (expanded * soft,)

    return _record("logsumexp", (a,), np.asarray(out), backward_fn)


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift.

    ``gain`` and ``bias`` must be 1-D of the last-axis length.
    """
    n = a.data.shape[-1]
    if gain.data.shape != (n,) or bias.data.shape != (n,):
        raise ShapeError(f"layer_norm: gain/bias must have shape ({n},), got "
                         f"{gain.data.shape} and {bias.data.shape}")
    mean = a.data.mean(axis=-1, keepdims=True)
    centered = a.data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    out = gain.data * normed + bias.data
    gain_data = gain.data

    def backward_fn(g):
        g_normed = g * gain_data
        # d/dx of (x - mean) * inv_std, with mean and var both functions of x.
        term_mean = g_normed.mean(axis=-1, keepdims=True)
        term_proj = (g_normed * normed).mean(axis=-1, keepdims=True)
        ga = inv_std * (g_normed - term_mean - normed * term_proj) if a.requires_grad else None
        ggain = (g * normed).reshape(-1, n).sum(axis=0) if gain.requires_grad else None
        gbias = g.reshape(-1, n).sum(axis=0) if bias.requires_grad else None
        return ga, ggain, gbias

    return _record("layer_norm", (a, gain, bias), out, backward_fn)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather: out[..., :] = table[ids[...], :].

    ``ids`` is a plain integer ndarray (not a Tensor); gradients flow only
    into ``table``, via scatter-add over repeated ids.
    """
    ids = np.asarray(ids)
    if not np.issubdtype(ids.dtype, np.integer):
        raise ShapeError(f"embedding: ids must be integers, got dtype {ids.dtype}")
    if table.data.ndim != 2:
        raise ShapeError(f"embedding: table must be 2-D, got shape {table.data.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise ShapeError(f"embedding: ids out of range [0, {table.data.shape[0]})")
    out = table.data[ids]
    vocab, dim = table.data.shape

    def backward_fn(g):
        gt = np.zeros((vocab, dim), dtype=np.float64)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, dim))
        return (gt,)

    return _record("embedding", (table,), out, backward_fn)
