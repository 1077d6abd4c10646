"""Adam optimizer with bias correction, plus global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError
from .tensor import Tensor

__all__ = ["AdamState", "adam_step", "clip_gradients", "global_norm"]


@dataclass
class AdamState:
    """Per-parameter first/second moment estimates plus shared scalars."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)


def global_norm(grads: dict[str, np.ndarray]) -> float:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    return float(np.sqrt(total))


def clip_gradients(
    grads: dict[str, np.ndarray], max_norm: float
) -> tuple[dict[str, np.ndarray], float]:
    """Scale all gradients by ``max_norm / norm`` when the global norm exceeds it.

    Returns the (possibly rescaled) gradient dict and the pre-clip norm.
    Clipping is idempotent: re-clipping clipped gradients changes nothing.
    """
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return dict(grads), norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> None:
    """One in-place Adam update over every parameter in ``params``.

    Raises ``TrainingError`` naming the offending parameter if its gradient
    contains NaN or infinity.
    """
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1 ** t
    bias2 = 1.0 - b2 ** t
    for name in sorted(params):
        param = params[name]
        grad = grads.get(name)
        if grad is None:
            raise TrainingError(f"missing gradient for parameter {name!r}")
        if not np.all(np.isfinite(grad)):
            raise TrainingError(f"non-finite gradient for parameter {name!r}")
        if grad.shape != param.data.shape:
            raise TrainingError(
                f"gradient shape {grad.shape} does not match parameter "
                f"{name!r} of shape {param.data.shape}"
            )
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * (grad * grad)
        state.first_moment[name] = m
        state.second_moment[name] = v
        m_hat = m / bias1
        v_hat = v / bias2
        param.data -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
