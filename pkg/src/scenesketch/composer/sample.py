"""Autoregressive layout sampling from a trained composer.

Temperature convention: discrete heads divide logits by ``t`` before the
softmax; Gaussian components scale their standard deviations by ``sqrt(t)``.
``t = 0`` is the deterministic limit — highest-weight component, mean
offsets, argmax flags and classes (ties resolve to the lowest id).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data.errors import DataError
from ..data.layout import (FLAG_BOX, FLAG_END, FLAG_START, Box, PlacedObject)
from ..data.vocab import LabelVocab, TextVocab
from ..engine import CheckpointError, Tensor, load_checkpoint, ops
from ..mixtures import mdn_step_arrays, sample_bivariate, sample_categorical
from ..rng import child_seed
from .model import ComposerConfig, composer_forward, size_head_params
from .train import ComposerTrainResult

__all__ = ["LayoutScene", "ComposerBundle", "load_composer", "bundle_from_result",
           "sample_layout", "sample_layout_candidates", "autocomplete_layout",
           "candidate_seed"]

_MIN_SIZE = 0.01  # smallest side a sampled box may clamp to


@dataclass
class LayoutScene:
    """A sampled scene: placed objects plus sampling provenance."""

    description: str
    objects: tuple[PlacedObject, ...]
    seed: int
    temperature: float
    truncated: bool = False
    clamped_count: int = 0
    source: str = "model"

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "objects": [
                {"class": o.label,
                 "x": o.box.x, "y": o.box.y, "w": o.box.w, "h": o.box.h}
                for o in self.objects
            ],
            "seed": self.seed,
            "temperature": self.temperature,
            "truncated": self.truncated,
            "clamped_count": self.clamped_count,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LayoutScene":
        try:
            objects = tuple(
                PlacedObject(obj["class"],
                             Box(obj["x"], obj["y"], obj["w"], obj["h"]))
                for obj in data["objects"])
            return cls(description=data["description"], objects=objects,
                       seed=int(data.get("seed", 0)),
                       temperature=float(data.get("temperature", 0.0)),
                       truncated=bool(data.get("truncated", False)),
                       clamped_count=int(data.get("clamped_count", 0)),
                       source=str(data.get("source", "model")))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed layout document: {exc}") from exc


@dataclass
class ComposerBundle:
    params: dict[str, Tensor]
    config: ComposerConfig
    text_vocab: TextVocab
    label_vocab: LabelVocab


def bundle_from_result(result: ComposerTrainResult) -> ComposerBundle:
    return ComposerBundle(result.params, result.config,
                          result.text_vocab, result.label_vocab)


def load_composer(path: str | Path) -> ComposerBundle:
    ckpt = load_checkpoint(path)
    if ckpt.extra.get("kind") != "composer":
        raise CheckpointError(
            f"checkpoint at {path} is not a composer checkpoint "
            f"(kind={ckpt.extra.get('kind')!r})")
    config = ComposerConfig.from_dict(ckpt.config)
    params = {name: Tensor(arr, requires_grad=True, name=name)
              for name, arr in ckpt.tensors.items()}
    return ComposerBundle(params=params, config=config,
                          text_vocab=TextVocab.from_list(ckpt.extra["text_vocab"]),
                          label_vocab=LabelVocab.from_list(ckpt.extra["labels"]))


# Candidate i draws from the i-th child stream of the request seed.
candidate_seed = child_seed


def _clamp(value: float, lo: float, hi: float) -> tuple[float, bool]:
    clipped = min(max(value, lo), hi)
    return clipped, clipped != value


def _generate(bundle: ComposerBundle, description: str,
              prefix: Sequence[PlacedObject], seed: int, temperature: float,
              max_objects: int | None) -> LayoutScene:
    config = bundle.config
    if max_objects is None:
        max_objects = config.max_seq_len - 2
    if max_objects < 1:
        raise DataError("max_objects must be at least 1")
    prompt_ids = bundle.text_vocab.encode(description)
    if not prompt_ids:
        raise DataError("description has no words to encode")
    if len(prefix) > max_objects:
        raise DataError(f"prefix has {len(prefix)} objects but the scene "
                        f"allows at most {max_objects}")

    text_ids = np.asarray([prompt_ids], dtype=np.int64)
    text_mask = np.ones_like(text_ids, dtype=np.float64)

    coords = [np.zeros(4)]
    labels = [bundle.label_vocab.blank_id]
    flags = [FLAG_START]
    for obj in prefix:
        coords.append(obj.box.as_array())
        labels.append(bundle.label_vocab.id(obj.label))
        flags.append(FLAG_BOX)

    rng = np.random.default_rng(int(seed))
    placed: list[PlacedObject] = list(prefix)
    clamped_count = 0
    truncated = False

    while True:
        t = len(coords)
        outputs = composer_forward(
            bundle.params, config, text_ids, text_mask,
            np.asarray(coords)[None, :, :], np.asarray(labels, dtype=np.int64)[None, :],
            np.asarray(flags, dtype=np.int64)[None, :], np.zeros((1, t, 2)))

        # Start is never a valid continuation; forbid end until one box exists.
        forbidden = [FLAG_START] if placed else [FLAG_START, FLAG_END]
        flag = sample_categorical(outputs.flag_logits.data[0, -1],
                                   temperature, rng, forbidden=forbidden)
        if flag == FLAG_END:
            break
        if len(placed) >= max_objects:
            truncated = True
            break

        x_raw, y_raw = sample_bivariate(
            mdn_step_arrays(outputs.mdn_xy, 0, t - 1), temperature, rng)
        x, cx = _clamp(x_raw, 0.0, 1.0)
        y, cy = _clamp(y_raw, 0.0, 1.0)

        last_t = ops.slice_axis(outputs.decoder_out, 1, t - 1, t)  # (1, 1, D)
        mdn_wh = size_head_params(bundle.params, config, last_t,
                                  np.array([[[x, y]]]))
        w_raw, h_raw = sample_bivariate(
            mdn_step_arrays(mdn_wh, 0, 0), temperature, rng)
        w, cw = _clamp(w_raw, _MIN_SIZE, 1.0)
        h, ch = _clamp(h_raw, _MIN_SIZE, 1.0)
        clamped_count += sum((cx, cy, cw, ch))

        class_id = int(np.argmax(outputs.class_probs.data[0, -1]))
        label = bundle.label_vocab.label(class_id)

        placed.append(PlacedObject(label=label, box=Box(x, y, w, h)))
        coords.append(np.array([x, y, w, h]))
        labels.append(class_id)
        flags.append(FLAG_BOX)

    return LayoutScene(description=description, objects=tuple(placed),
                       seed=seed, temperature=temperature,
                       truncated=truncated, clamped_count=clamped_count)


def sample_layout(bundle: ComposerBundle, description: str, seed: int = 0,
                  temperature: float = 0.6,
                  max_objects: int | None = None) -> LayoutScene:
    """Sample one scene for a description."""
    return _generate(bundle, description, (), seed, temperature, max_objects)


def autocomplete_layout(bundle: ComposerBundle, description: str,
                        prefix: Sequence[PlacedObject], seed: int = 0,
                        temperature: float = 0.6,
                        max_objects: int | None = None) -> LayoutScene:
    """Continue a partial scene.  The prefix objects are kept verbatim and
    appear first in the result; an empty prefix is exactly ``sample_layout``."""
    return _generate(bundle, description, tuple(prefix), seed, temperature,
                     max_objects)


def sample_layout_candidates(bundle: ComposerBundle, description: str,
                             k: int, seed: int = 0, temperature: float = 0.6,
                             max_objects: int | None = None) -> list[LayoutScene]:
    """k independent scenes, one per deterministically derived child seed."""
    if k < 1:
        raise DataError("candidate count must be at least 1")
    return [
        _generate(bundle, description, (), candidate_seed(seed, i),
                  temperature, max_objects)
        for i in range(k)
    ]
