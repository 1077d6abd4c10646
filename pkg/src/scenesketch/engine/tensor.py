"""Reverse-mode automatic differentiation over float64 numpy arrays.

A ``Tensor`` wraps a dense, row-major ``numpy.ndarray`` of dtype float64.
Operations (see ``ops``) compute with numpy and, while a ``Tape`` is active,
record one ``Node`` per call in creation order.  Because every node's inputs
already exist when the node is recorded, tape order is a topological order,
and ``backward`` simply walks the node list in reverse, accumulating
vector-Jacobian products into a gradient map.

Broadcasting is deliberately restricted: two operands must either have equal
shapes, or the smaller operand's shape must be a suffix of the larger one's
(the bias-add pattern).  Anything fancier must be pre-tiled with numpy before
the values enter the graph.  This keeps every backward rule auditable: the
only "unbroadcast" ever needed is a sum over leading axes.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GradError, ShapeError

__all__ = ["Tensor", "Tape", "Node", "backward", "active_tape", "as_array"]


def as_array(value) -> np.ndarray:
    """Coerce ``value`` to a C-ordered float64 ndarray (0-d stays 0-d)."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return arr  # ascontiguousarray would promote 0-d to 1-d
    return np.ascontiguousarray(arr)


class Tensor:
    """A float64 array plus a grad-requirement flag.

    Identity (not value) is a tensor's name in the gradient map, so
    ``Tensor`` keeps default object hashing and never defines ``__eq__``.
    """

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = as_array(data)
        self.requires_grad = bool(requires_grad)
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else _non_scalar(self)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # Operator sugar; implementations live in ops.py (imported lazily to
    # avoid a circular import at module load).
    def __add__(self, other):
        from . import ops

        return ops.add(self, ops.wrap(other))

    def __radd__(self, other):
        from . import ops

        return ops.add(ops.wrap(other), self)

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, ops.wrap(other))

    def __rsub__(self, other):
        from . import ops

        return ops.sub(ops.wrap(other), self)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, ops.wrap(other))

    def __rmul__(self, other):
        from . import ops

        return ops.mul(ops.wrap(other), self)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, ops.wrap(other))

    def __rtruediv__(self, other):
        from . import ops

        return ops.div(ops.wrap(other), self)

    def __neg__(self):
        from . import ops

        return ops.neg(self)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)


def _non_scalar(t: Tensor):
    raise ShapeError(f"expected a scalar tensor, got shape {t.shape}")


class Node:
    """One recorded operation: inputs, output, and its vector-Jacobian rule.

    ``backward_fn`` maps the gradient w.r.t. the node output to a tuple of
    gradients w.r.t. each input (``None`` for inputs that need none).
    """

    __slots__ = ("op", "inputs", "output", "backward_fn")

    def __init__(
        self,
        op: str,
        inputs: Sequence[Tensor],
        output: Tensor,
        backward_fn: Callable[[np.ndarray], tuple],
    ):
        self.op = op
        self.inputs = tuple(inputs)
        self.output = output
        self.backward_fn = backward_fn


_TAPE_STACK: list["Tape"] = []


class Tape:
    """Records nodes while active (used as a context manager)."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[Node] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _TAPE_STACK.pop()
        if popped is not self:  # pragma: no cover - defensive
            raise GradError("tape stack corrupted")

    def record(self, node: Node) -> None:
        self.nodes.append(node)


def active_tape() -> "Tape | None":
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def backward(
    tape: Tape,
    loss: Tensor,
    leaves: Iterable[Tensor] = (),
) -> dict[Tensor, np.ndarray]:
    """Accumulate d(loss)/d(tensor) for every tensor reachable from ``loss``.

    ``loss`` must be scalar (size 1).  Returns a mapping keyed by Tensor
    identity.  Every tensor in ``leaves`` is guaranteed a key; leaves the
    loss does not depend on get an explicit zero gradient of their shape.
    """
    if loss.data.size != 1:
        raise GradError(f"backward requires a scalar loss, got shape {loss.shape}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    by_id: dict[int, Tensor] = {id(loss): loss}

    for node in reversed(tape.nodes):
        out_grad = grads.get(id(node.output))
        if out_grad is None:
            continue
        input_grads = node.backward_fn(out_grad)
        if len(input_grads) != len(node.inputs):  # pragma: no cover - defensive
            raise GradError(f"op {node.op!r} returned {len(input_grads)} grads "
                            f"for {len(node.inputs)} inputs")
        for tensor, grad in zip(node.inputs, input_grads):
            if grad is None:
                continue
            if grad.shape != tensor.data.shape:  # pragma: no cover - defensive
                raise GradError(
                    f"op {node.op!r} produced grad of shape {grad.shape} "
                    f"for input of shape {tensor.data.shape}"
                )
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = grad
                by_id[key] = tensor

    result: dict[Tensor, np.ndarray] = {}
    for key, value in grads.items():
        result[by_id[key]] = value
    for leaf in leaves:
        if leaf not in result:
            result[leaf] = np.zeros_like(leaf.data)
    return result
