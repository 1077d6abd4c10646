"""Sampling sketches from a trained stroke generator."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.errors import DataError
from ..data.strokes import SketchRecord, make_sketch_record, stroke5_to_polylines
from ..engine import CheckpointError, Tensor, load_checkpoint, ops
from ..mixtures import mdn_step_arrays, sample_bivariate, sample_categorical
from .model import SketcherConfig, sketcher_step
from .train import SketcherTrainResult

__all__ = ["SketcherBundle", "load_sketcher", "sketcher_bundle_from_result",
           "sample_sketch"]

_PEN_DOWN, _PEN_UP, _PEN_END = 0, 1, 2


@dataclass
class SketcherBundle:
    params: dict[str, Tensor]
    config: SketcherConfig
    class_label: str


def sketcher_bundle_from_result(result: SketcherTrainResult) -> SketcherBundle:
    return SketcherBundle(result.params, result.config, result.class_label)


def load_sketcher(path: str | Path) -> SketcherBundle:
    ckpt = load_checkpoint(path)
    if ckpt.extra.get("kind") != "sketcher":
        raise CheckpointError(
            f"checkpoint at {path} is not a stroke-generator checkpoint "
            f"(kind={ckpt.extra.get('kind')!r})")
    params = {name: Tensor(arr, requires_grad=True, name=name)
              for name, arr in ckpt.tensors.items()}
    return SketcherBundle(params=params,
                          config=SketcherConfig.from_dict(ckpt.config),
                          class_label=ckpt.extra["class_label"])


def sample_sketch(bundle: SketcherBundle, ratio: float,
                  temperature: float = 0.4, seed: int = 0,
                  max_steps: int | None = None) -> SketchRecord:
    """Generate one sketch at the requested aspect ratio.

    The returned record's ``aspect_ratio`` is the **achieved** ink ratio of
    the generated strokes (after re-normalization), not the request; the
    request is kept in ``metadata["requested_ratio"]``.  ``truncated`` is
    set when the step budget ran out before the model emitted an end state.
    """
    if not np.isfinite(ratio) or ratio <= 0.0:
        raise DataError(f"aspect ratio must be positive, got {ratio}")
    config = bundle.config
    if max_steps is None:
        max_steps = config.max_steps
    if max_steps < 2:
        raise DataError("max_steps must be at least 2")

    rng = np.random.default_rng(int(seed))
    hid = config.hidden_size
    h = ops.constant(np.zeros((1, hid)))
    c = ops.constant(np.zeros((1, hid)))
    prev = np.zeros(5)
    rows: list[np.ndarray] = []
    down_seen = False
    truncated = True
    for _ in range(max_steps):
        mdn, pen_logits, h, c = sketcher_step(bundle.params, config, prev,
                                              h, c, float(ratio))
        # Degenerate-ink guard: until the pen has touched down once there
        # is no drawable segment, so only pen-down is allowed; ending also
        # stays forbidden until at least two rows exist.
        forbidden: tuple[int, ...] = ()
        if not down_seen:
            forbidden = (_PEN_UP, _PEN_END)
        elif len(rows) < 2:
            forbidden = (_PEN_END,)
        pen = sample_categorical(pen_logits, temperature, rng,
                                 forbidden=forbidden)
        if pen == _PEN_END:
            rows.append(np.array([0.0, 0.0, 0.0, 0.0, 1.0]))
            truncated = False
            break
        dx, dy = sample_bivariate(mdn_step_arrays(mdn, 0, 0), temperature, rng)
        row = np.zeros(5)
        row[0], row[1] = dx, dy
        row[2 + pen] = 1.0
        rows.append(row)
        prev = row
        down_seen = down_seen or pen == _PEN_DOWN
    if truncated:
        rows.append(np.array([0.0, 0.0, 0.0, 0.0, 1.0]))

    polylines = stroke5_to_polylines(np.asarray(rows))
    record = make_sketch_record(polylines, bundle.class_label,
                                truncated=truncated)
    record.metadata.update({
        "requested_ratio": float(ratio),
        "temperature": float(temperature),
        "seed": int(seed),
        "steps": len(rows),
    })
    return record
