"""Teacher-forced training loop for the layout composer."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.layout import FLAG_BOX, FLAG_END, LayoutRecord, encode_layout
from ..data.vocab import LabelVocab, TextVocab
from ..engine import (AdamState, Tape, Tensor, TrainingError, adam_step,
                      backward, clip_gradients, ops, save_checkpoint)
from ..rng import make_rng
from .losses import composer_losses
from .model import ComposerConfig, composer_forward, init_composer_params

__all__ = ["ComposerTrainResult", "TrainingArrays", "build_training_arrays",
           "train_composer", "write_loss_csv", "LOSS_FIELDS"]

LOSS_FIELDS = ("step", "L_xy", "L_wh", "L_p", "L_class", "L_SC")


@dataclass
class TrainingArrays:
    """Whole-corpus tensors, padded to a common length, ready to batch."""

    text_ids: np.ndarray       # (N, Tt) int64
    text_mask: np.ndarray      # (N, Tt) float 0/1
    in_coords: np.ndarray      # (N, T, 4)
    in_labels: np.ndarray      # (N, T)
    in_flags: np.ndarray       # (N, T)
    target_coords: np.ndarray  # (N, T, 4)
    target_labels: np.ndarray  # (N, T) sanitized to 0 outside box steps
    target_flags: np.ndarray   # (N, T)
    step_mask: np.ndarray      # (N, T)
    box_mask: np.ndarray       # (N, T)


@dataclass
class ComposerTrainResult:
    params: dict[str, Tensor]
    config: ComposerConfig
    text_vocab: TextVocab
    label_vocab: LabelVocab
    loss_rows: list[dict]
    seed: int
    checkpoint_path: Path | None = None
    loss_csv_path: Path | None = None

    @property
    def final_losses(self) -> dict[str, float]:
        return {k: v for k, v in self.loss_rows[-1].items() if k != "step"}


def build_training_arrays(
    records: list[LayoutRecord],
    label_vocab: LabelVocab,
    text_vocab: TextVocab,
    config: ComposerConfig,
) -> TrainingArrays:
    token_seqs = [encode_layout(r, label_vocab, text_vocab) for r in records]
    n = len(token_seqs)
    t_in = max(seq.length for seq in token_seqs) - 1
    if t_in > config.max_seq_len:
        raise TrainingError(
            f"corpus needs {t_in} decoder steps but max_seq_len is {config.max_seq_len}")
    tt = max(len(seq.prompt_ids) for seq in token_seqs)
    if tt > config.max_text_len:
        raise TrainingError(
            f"corpus needs {tt} prompt tokens but max_text_len is {config.max_text_len}")

    text_ids = np.zeros((n, tt), dtype=np.int64)
    text_mask = np.zeros((n, tt))
    in_coords = np.zeros((n, t_in, 4))
    in_labels = np.full((n, t_in), label_vocab.blank_id, dtype=np.int64)
    in_flags = np.full((n, t_in), FLAG_END, dtype=np.int64)
    target_coords = np.zeros((n, t_in, 4))
    target_labels = np.zeros((n, t_in), dtype=np.int64)
    target_flags = np.full((n, t_in), FLAG_END, dtype=np.int64)
    step_mask = np.zeros((n, t_in))
    box_mask = np.zeros((n, t_in))

    for row, seq in enumerate(token_seqs):
        s_in = seq.length - 1
        text_ids[row, : len(seq.prompt_ids)] = seq.prompt_ids
        text_mask[row, : len(seq.prompt_ids)] = 1.0
        in_coords[row, :s_in] = seq.coords[:-1]
        in_labels[row, :s_in] = seq.labels[:-1]
        in_flags[row, :s_in] = seq.flags[:-1]
        target_coords[row, :s_in] = seq.coords[1:]
        target_flags[row, :s_in] = seq.flags[1:]
        step_mask[row, :s_in] = 1.0
        is_box = seq.flags[1:] == FLAG_BOX
        box_mask[row, :s_in][is_box] = 1.0
        # Class targets only exist on box steps; other rows stay 0 and are
        # masked out (the blank id would fall outside the class head range).
        target_labels[row, :s_in][is_box] = seq.labels[1:][is_box]

    return TrainingArrays(text_ids, text_mask, in_coords, in_labels, in_flags,
                          target_coords, target_labels, target_flags,
                          step_mask, box_mask)


def _batch_view(arrays: TrainingArrays, idx: np.ndarray) -> TrainingArrays:
    return TrainingArrays(*[getattr(arrays, f.name)[idx]
                            for f in arrays.__dataclass_fields__.values()])


def write_loss_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOSS_FIELDS)
        for row in rows:
            writer.writerow([row["step"]] +
                            [f"{row[k]:.6f}" for k in LOSS_FIELDS[1:]])


def train_composer(
    records: list[LayoutRecord],
    seed: int = 0,
    config: ComposerConfig | None = None,
    config_kwargs: dict | None = None,
    out_dir: str | Path | None = None,
) -> ComposerTrainResult:
    """Train on layout records; returns parameters, vocabularies and the
    per-step loss curve.  When ``out_dir`` is given, writes ``composer.ckpt``
    and ``composer_loss.csv`` there deterministically."""
    if not records:
        raise TrainingError("cannot train on an empty corpus")
    label_vocab = LabelVocab()
    for record in records:
        for obj in record.objects:
            label_vocab.add(obj.label)
    text_vocab = TextVocab.from_texts(r.description for r in records)

    if config is None:
        config = ComposerConfig(text_vocab_size=len(text_vocab),
                                num_classes=label_vocab.num_classes,
                                **(config_kwargs or {}))
    else:
        if (config.text_vocab_size != len(text_vocab)
                or config.num_classes != label_vocab.num_classes):
            raise TrainingError(
                "config vocab sizes do not match the corpus "
                f"(text {config.text_vocab_size} vs {len(text_vocab)}, "
                f"classes {config.num_classes} vs {label_vocab.num_classes})")

    arrays = build_training_arrays(records, label_vocab, text_vocab, config)
    n = arrays.text_ids.shape[0]
    batch_size = min(config.batch_size, n)

    init_rng = make_rng(seed, "composer-init")
    params = init_composer_params(config, init_rng)
    state = AdamState(learning_rate=config.learning_rate)
    order_rng = make_rng(seed, "composer-train")

    loss_rows: list[dict] = []
    order = np.array([], dtype=np.int64)
    for step in range(config.train_steps):
        if order.size < batch_size:
            order = order_rng.permutation(n)
        idx, order = order[:batch_size], order[batch_size:]
        batch = _batch_view(arrays, idx)

        with Tape() as tape:
            outputs = composer_forward(
                params, config, batch.text_ids, batch.text_mask,
                batch.in_coords, batch.in_labels, batch.in_flags,
                batch.target_coords[:, :, 0:2])
            parts = composer_losses(
                outputs, config, batch.target_coords, batch.target_labels,
                batch.target_flags, batch.step_mask, batch.box_mask)
            mean_loss = parts["L_SC"] * ops.wrap(1.0 / batch_size)

        row = {"step": step}
        for key in LOSS_FIELDS[1:]:
            row[key] = float(parts[key].data) / batch_size
        if not all(np.isfinite(v) for k, v in row.items() if k != "step"):
            raise TrainingError(f"non-finite loss at step {step}: {row}")
        loss_rows.append(row)

        grads = backward(tape, mean_loss, leaves=list(params.values()))
        grads_by_name = {name: grads[tensor] for name, tensor in params.items()}
        clipped, _ = clip_gradients(grads_by_name, config.clip_norm)
        adam_step(params, clipped, state)

    result = ComposerTrainResult(params=params, config=config,
                                 text_vocab=text_vocab, label_vocab=label_vocab,
                                 loss_rows=loss_rows, seed=seed)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        ckpt_path = out_dir / "composer.ckpt"
        extra = {
            "kind": "composer",
            "text_vocab": text_vocab.to_list(),
            "labels": label_vocab.to_list(),
            "final_losses": {k: round(v, 6) for k, v in result.final_losses.items()},
        }
        save_checkpoint(ckpt_path, {k: t.data for k, t in params.items()},
                        config.to_dict(), seed=seed, extra=extra)
        csv_path = out_dir / "composer_loss.csv"
        write_loss_csv(loss_rows, csv_path)
        result.checkpoint_path = ckpt_path
        result.loss_csv_path = csv_path
    return result
