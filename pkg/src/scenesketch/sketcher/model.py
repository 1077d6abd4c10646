"""Aspect-ratio-conditioned stroke generator.

A single recurrent cell consumes, at every step, the concatenation of the
previous stroke-5 row, the previous hidden state, and the target aspect
ratio ``r`` (so the conditioning signal is present at every step, not just
the first).  The output projection ``y = W h + b`` yields parameters for a
bivariate mixture over the pen offset plus three pen-state logits
(down / up / end-of-sketch).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..engine import Tensor, ops
from ..mixtures import MdnParams, mdn_from_raw

__all__ = ["SketcherConfig", "init_sketcher_params", "sketcher_forward",
           "sketcher_step", "lstm_cell"]


@dataclass(frozen=True)
class SketcherConfig:
    """Architecture and training hyper-parameters for the stroke generator."""

    hidden_size: int = 256
    n_mixtures: int = 5
    max_steps: int = 96
    learning_rate: float = 1e-3
    clip_norm: float = 1.0
    batch_size: int = 32
    train_steps: int = 1500

    @property
    def input_size(self) -> int:
        # [previous stroke row (5); previous hidden state; aspect ratio]
        return 5 + self.hidden_size + 1

    @property
    def output_size(self) -> int:
        return 6 * self.n_mixtures + 3

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SketcherConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def init_sketcher_params(config: SketcherConfig,
                         rng: np.random.Generator) -> dict[str, Tensor]:
    h = config.hidden_size
    bias = np.zeros(4 * h)
    bias[h: 2 * h] = 1.0  # forget-gate bias
    raw = {
        "lstm.wx": rng.normal(0.0, 0.02, size=(config.input_size, 4 * h)),
        "lstm.wh": rng.normal(0.0, 0.02, size=(h, 4 * h)),
        "lstm.b": bias,
        "out.w": rng.normal(0.0, 0.02, size=(h, config.output_size)),
        "out.b": np.zeros(config.output_size),
    }
    return {name: Tensor(value, requires_grad=True, name=name)
            for name, value in raw.items()}


def lstm_cell(params: dict[str, Tensor], x: Tensor, h: Tensor, c: Tensor,
              hidden: int) -> tuple[Tensor, Tensor]:
    """One step of a standard LSTM cell with input/forget/cell/output gates."""
    gates = (ops.matmul(x, params["lstm.wx"])
             + ops.matmul(h, params["lstm.wh"]) + params["lstm.b"])
    i_g = ops.sigmoid(ops.slice_axis(gates, -1, 0, hidden))
    f_g = ops.sigmoid(ops.slice_axis(gates, -1, hidden, 2 * hidden))
    g_g = ops.tanh(ops.slice_axis(gates, -1, 2 * hidden, 3 * hidden))
    o_g = ops.sigmoid(ops.slice_axis(gates, -1, 3 * hidden, 4 * hidden))
    c_new = f_g * c + i_g * g_g
    h_new = o_g * ops.tanh(c_new)
    return h_new, c_new


def sketcher_forward(
    params: dict[str, Tensor],
    config: SketcherConfig,
    inputs: np.ndarray,   # (B, T, 5); row t is the stroke row preceding step t
    ratios: np.ndarray,   # (B,) target aspect ratios
) -> tuple[MdnParams, Tensor]:
    """Teacher-forced pass; returns offset mixture params and pen logits."""
    b, t, _ = inputs.shape
    hid = config.hidden_size
    h = ops.constant(np.zeros((b, hid)))
    c = ops.constant(np.zeros((b, hid)))
    r_col = ops.constant(ratios.reshape(b, 1).astype(np.float64))
    step_outputs = []
    for step in range(t):
        x = ops.concat([ops.constant(inputs[:, step, :]), h, r_col], axis=-1)
        h, c = lstm_cell(params, x, h, c, hid)
        y = ops.matmul(h, params["out.w"]) + params["out.b"]  # (B, out)
        step_outputs.append(ops.reshape(y, (b, 1, config.output_size)))
    raw = ops.concat(step_outputs, axis=1)  # (B, T, out)
    m6 = 6 * config.n_mixtures
    mdn = mdn_from_raw(ops.slice_axis(raw, -1, 0, m6), config.n_mixtures)
    pen_logits = ops.slice_axis(raw, -1, m6, m6 + 3)
    return mdn, pen_logits


def sketcher_step(
    params: dict[str, Tensor],
    config: SketcherConfig,
    prev_row: np.ndarray,  # (5,)
    h: Tensor,             # (1, H)
    c: Tensor,             # (1, H)
    ratio: float,
) -> tuple[MdnParams, np.ndarray, Tensor, Tensor]:
    """One sampling step; returns (offset mixture, pen logits (3,), h, c)."""
    x = ops.concat([ops.constant(prev_row.reshape(1, 5)), h,
                    ops.constant(np.array([[float(ratio)]]))], axis=-1)
    h_new, c_new = lstm_cell(params, x, h, c, config.hidden_size)
    y = ops.matmul(h_new, params["out.w"]) + params["out.b"]  # (1, out)
    m6 = 6 * config.n_mixtures
    raw = ops.reshape(ops.slice_axis(y, -1, 0, m6), (1, 1, m6))
    mdn = mdn_from_raw(raw, config.n_mixtures)
    pen_logits = y.data[0, m6: m6 + 3]
    return mdn, pen_logits, h_new, c_new
