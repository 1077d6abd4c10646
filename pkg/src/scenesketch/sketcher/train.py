"""Training loop for the stroke generator (one model per object class)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.strokes import SketchRecord
from ..engine import (AdamState, Tape, Tensor, TrainingError, adam_step,
                      backward, clip_gradients, ops, save_checkpoint)
from ..mixtures import MdnParams, mdn_nll, sequence_cross_entropy
from ..rng import make_rng
from .model import SketcherConfig, init_sketcher_params, sketcher_forward

__all__ = ["SketcherTrainResult", "StrokeArrays", "build_stroke_arrays",
           "sketch_losses", "train_sketcher", "write_sketch_loss_csv",
           "SKETCH_LOSS_FIELDS"]

SKETCH_LOSS_FIELDS = ("step", "L_offset", "L_pen", "L_R")

_END_ROW = np.array([0.0, 0.0, 0.0, 0.0, 1.0])


@dataclass
class StrokeArrays:
    """Whole-corpus stroke tensors, padded with absorbing end rows."""

    inputs: np.ndarray       # (N, T, 5); step t sees the row preceding it
    targets: np.ndarray      # (N, T, 5)
    pen_targets: np.ndarray  # (N, T) int in {0 down, 1 up, 2 end}
    offset_mask: np.ndarray  # (N, T) 1 through the first end row, 0 after
    ratios: np.ndarray       # (N,)


@dataclass
class SketcherTrainResult:
    params: dict[str, Tensor]
    config: SketcherConfig
    class_label: str
    loss_rows: list[dict]
    seed: int
    checkpoint_path: Path | None = None
    loss_csv_path: Path | None = None

    @property
    def final_losses(self) -> dict[str, float]:
        return {k: v for k, v in self.loss_rows[-1].items() if k != "step"}


def build_stroke_arrays(records: list[SketchRecord]) -> StrokeArrays:
    n = len(records)
    t_max = max(r.strokes.shape[0] for r in records)
    inputs = np.zeros((n, t_max, 5))
    targets = np.tile(_END_ROW, (n, t_max, 1))
    pen_targets = np.full((n, t_max), 2, dtype=np.int64)
    offset_mask = np.zeros((n, t_max))
    ratios = np.zeros(n)
    for row, rec in enumerate(records):
        strokes = rec.strokes
        t = strokes.shape[0]
        inputs[row, 1:t] = strokes[:-1]  # step 0 sees the zero row
        targets[row, :t] = strokes
        pen_targets[row, :t] = np.argmax(strokes[:, 2:], axis=1)
        offset_mask[row, :t] = 1.0  # includes the (zero-offset) end row
        ratios[row] = rec.aspect_ratio
    return StrokeArrays(inputs, targets, pen_targets, offset_mask, ratios)


def sketch_losses(mdn: MdnParams, pen_logits: Tensor, arrays: StrokeArrays,
                  idx: np.ndarray) -> dict[str, Tensor]:
    """Offset NLL (masked after the end row) plus pen CE over all steps."""
    targets = arrays.targets[idx]
    l_offset = mdn_nll(mdn, targets[:, :, 0:2], arrays.offset_mask[idx])
    pen_mask = np.ones(targets.shape[:2])
    l_pen = sequence_cross_entropy(pen_logits, arrays.pen_targets[idx], pen_mask)
    return {"L_offset": l_offset, "L_pen": l_pen, "L_R": l_offset + l_pen}


def write_sketch_loss_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SKETCH_LOSS_FIELDS)
        for row in rows:
            writer.writerow([row["step"]] +
                            [f"{row[k]:.6f}" for k in SKETCH_LOSS_FIELDS[1:]])


def train_sketcher(
    records: list[SketchRecord],
    seed: int = 0,
    config: SketcherConfig | None = None,
    config_kwargs: dict | None = None,
    out_dir: str | Path | None = None,
) -> SketcherTrainResult:
    """Train a single-class stroke generator.

    Mixed-class corpora are rejected: each class gets its own model, and
    the registry maps classes to checkpoints.
    """
    if not records:
        raise TrainingError("cannot train on an empty stroke corpus")
    labels = sorted({r.class_label for r in records})
    if len(labels) > 1:
        raise TrainingError(f"stroke corpus mixes classes {labels}; "
                            "train one model per class")
    class_label = labels[0]
    if config is None:
        config = SketcherConfig(**(config_kwargs or {}))

    arrays = build_stroke_arrays(records)
    if not np.all(arrays.ratios > 0):
        raise TrainingError("every record needs a positive aspect ratio")
    n = arrays.inputs.shape[0]
    batch_size = min(config.batch_size, n)

    params = init_sketcher_params(config, make_rng(seed, "sketcher-init"))
    state = AdamState(learning_rate=config.learning_rate)
    order_rng = make_rng(seed, "sketcher-train")

    loss_rows: list[dict] = []
    order = np.array([], dtype=np.int64)
    for step in range(config.train_steps):
        if order.size < batch_size:
            order = order_rng.permutation(n)
        idx, order = order[:batch_size], order[batch_size:]

        with Tape() as tape:
            mdn, pen_logits = sketcher_forward(
                params, config, arrays.inputs[idx], arrays.ratios[idx])
            parts = sketch_losses(mdn, pen_logits, arrays, idx)
            mean_loss = parts["L_R"] * ops.wrap(1.0 / batch_size)

        row = {"step": step}
        for key in SKETCH_LOSS_FIELDS[1:]:
            row[key] = float(parts[key].data) / batch_size
        if not all(np.isfinite(v) for k, v in row.items() if k != "step"):
            raise TrainingError(f"non-finite loss at step {step}: {row}")
        loss_rows.append(row)

        grads = backward(tape, mean_loss, leaves=list(params.values()))
        grads_by_name = {name: grads[tensor] for name, tensor in params.items()}
        clipped, _ = clip_gradients(grads_by_name, config.clip_norm)
        adam_step(params, clipped, state)

    result = SketcherTrainResult(params=params, config=config,
                                 class_label=class_label,
                                 loss_rows=loss_rows, seed=seed)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        ckpt_path = out_dir / f"sketcher_{class_label}.ckpt"
        extra = {
            "kind": "sketcher",
            "class_label": class_label,
            "final_losses": {k: round(v, 6) for k, v in result.final_losses.items()},
        }
        save_checkpoint(ckpt_path, {k: t.data for k, t in params.items()},
                        config.to_dict(), seed=seed, extra=extra)
        csv_path = out_dir / f"sketcher_{class_label}_loss.csv"
        write_sketch_loss_csv(loss_rows, csv_path)
        result.checkpoint_path = ckpt_path
        result.loss_csv_path = csv_path
    return result
