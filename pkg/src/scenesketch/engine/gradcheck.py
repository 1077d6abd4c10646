"""Central-difference verification of reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GradError
from .tensor import Tape, Tensor, backward

__all__ = ["GradCheckReport", "grad_check"]


@dataclass
class GradCheckReport:
    """Outcome of one gradient check.

    ``per_param`` maps parameter name to its worst relative error over the
    coordinates that were probed; ``failures`` lists (name, flat_index,
    analytic, numeric, rel_error) tuples exceeding the tolerance.
    """

    tolerance: float
    max_rel_error: float = 0.0
    per_param: dict[str, float] = field(default_factory=dict)
    failures: list[tuple[str, int, float, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _rel_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-6)


def grad_check(
    f: Callable[[], Tensor],
    params: dict[str, Tensor],
    tolerance: float = 1e-4,
    step: float = 1e-5,
    max_coords_per_param: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare reverse-mode gradients of ``f`` against central differences.

    ``f`` must rebuild the scalar loss from the current contents of
    ``params`` on every call and must not open its own tape.  When
    ``max_coords_per_param`` is given, that many coordinates per parameter
    are probed (chosen by a seeded RNG, always including the first and last
    coordinate); otherwise every coordinate is probed.
    """
    with Tape() as tape:
        loss = f()
    if loss.data.size != 1:
        raise GradError(f"grad_check requires a scalar loss, got shape {loss.shape}")
    grad_map = backward(tape, loss, leaves=params.values())

    rng = np.random.default_rng(seed)
    report = GradCheckReport(tolerance=tolerance)

    for name in sorted(params):
        param = params[name]
        analytic = grad_map[param]
        flat = param.data.reshape(-1)
        n = flat.size
        if max_coords_per_param is None or n <= max_coords_per_param:
            coords = np.arange(n)
        else:
            picked = rng.choice(n, size=max_coords_per_param, replace=False)
            coords = np.unique(np.concatenate([picked, [0, n - 1]]))
        worst = 0.0
        for idx in coords:
            idx = int(idx)
            original = flat[idx]
            flat[idx] = original + step
            plus = float(f().data.reshape(-1)[0])
            flat[idx] = original - step
            minus = float(f().data.reshape(-1)[0])
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * step)
            a = float(analytic.reshape(-1)[idx])
            rel = _rel_error(a, numeric)
            if rel > worst:
                worst = rel
            if rel > tolerance:
                report.failures.append((name, idx, a, numeric, rel))
        report.per_param[name] = worst
        if worst > report.max_rel_error:
            report.max_rel_error = worst
    return report
