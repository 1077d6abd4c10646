"""Scene layouts: labeled boxes on the unit canvas, plus token codecs.

Coordinates: the canvas is the unit square, x growing rightward and y
growing DOWNWARD (matching raster/SVG output), boxes anchored at their
centers.  A layout step is conceptually an 8-value vector
``(x, y, w, h, class, is_box, is_start, is_end)``; the codec stores the
four floats, the class id, and the flag index (0=box, 1=start, 2=end) in
parallel arrays.  A full sequence is ``start, box_1 .. box_n, end``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .vocab import LabelVocab, TextVocab

__all__ = [
    "FLAG_BOX", "FLAG_START", "FLAG_END",
    "Box", "PlacedObject", "LayoutRecord", "LayoutTokens", "ParsedLayouts",
    "encode_layout", "tokens_to_layout",
    "parse_layout_dataset", "write_layout_dataset",
]

FLAG_BOX = 0
FLAG_START = 1
FLAG_END = 2


@dataclass(frozen=True)
class Box:
    """Center-anchored box on the unit canvas."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise DataError(f"box center ({self.x}, {self.y}) outside unit canvas")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise DataError(f"box size ({self.w}, {self.h}) outside (0, 1]")

    @property
    def left(self) -> float:
        return self.x - self.w / 2.0

    @property
    def right(self) -> float:
        return self.x + self.w / 2.0

    @property
    def top(self) -> float:
        return self.y - self.h / 2.0

    @property
    def bottom(self) -> float:
        return self.y + self.h / 2.0

    def contains(self, px: float, py: float) -> bool:
        return abs(px - self.x) <= self.w / 2.0 and abs(py - self.y) <= self.h / 2.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)


@dataclass(frozen=True)
class PlacedObject:
    label: str
    box: Box


@dataclass(frozen=True)
class LayoutRecord:
    """A text description plus its objects in generation (= layer) order."""

    description: str
    objects: tuple[PlacedObject, ...]

    def boxes_array(self) -> np.ndarray:
        if not self.objects:
            return np.zeros((0, 4), dtype=np.float64)
        return np.stack([o.box.as_array() for o in self.objects])


@dataclass
class LayoutTokens:
    """Parallel arrays for one layout sequence (start, boxes..., end)."""

    coords: np.ndarray  # (S, 4) float64
    labels: np.ndarray  # (S,) int64; blank id on start/end steps
    flags: np.ndarray   # (S,) int64 in {FLAG_BOX, FLAG_START, FLAG_END}
    prompt_ids: list[int] = field(default_factory=list)

    @property
    def length(self) -> int:
        return int(self.coords.shape[0])


def encode_layout(
    record: LayoutRecord,
    label_vocab: LabelVocab,
    text_vocab: TextVocab | None = None,
) -> LayoutTokens:
    """Sequence-encode a layout: start token, one step per box, end token."""
    n = len(record.objects)
    if n == 0:
        raise DataError("cannot encode a layout with no objects")
    coords = np.zeros((n + 2, 4), dtype=np.float64)
    labels = np.full(n + 2, label_vocab.blank_id, dtype=np.int64)
    flags = np.full(n + 2, FLAG_BOX, dtype=np.int64)
    flags[0] = FLAG_START
    flags[-1] = FLAG_END
    for i, obj in enumerate(record.objects):
        coords[i + 1] = obj.box.as_array()
        labels[i + 1] = label_vocab.id(obj.label)
    prompt_ids = text_vocab.encode(record.description) if text_vocab else []
    return LayoutTokens(coords=coords, labels=labels, flags=flags, prompt_ids=prompt_ids)


def tokens_to_layout(
    coords: np.ndarray,
    labels: np.ndarray,
    flags: np.ndarray,
    label_vocab: LabelVocab,
    description: str = "",
) -> LayoutRecord:
    """Inverse of ``encode_layout``: keep box steps until the first end flag."""
    objects = []
    for coord, label, flag in zip(coords, labels, flags):
        if flag == FLAG_END:
            break
        if flag != FLAG_BOX:
            continue
        x, y, w, h = (float(v) for v in coord)
        objects.append(PlacedObject(label=label_vocab.label(int(label)),
                                    box=Box(x=x, y=y, w=w, h=h)))
    return LayoutRecord(description=description, objects=tuple(objects))


def _record_from_dict(data: dict) -> LayoutRecord:
    """Parse one dataset record; raises DataError on any malformation.

    Records carry fractional coordinates by default; a ``canvas: [W, H]``
    field declares pixel coordinates to be divided out.
    """
    if not isinstance(data, dict):
        raise DataError("record is not an object")
    description = data.get("description")
    raw_objects = data.get("objects")
    if not isinstance(description, str) or not isinstance(raw_objects, list):
        raise DataError("record must have string 'description' and list 'objects'")
    canvas = data.get("canvas")
    if canvas is None:
        scale_x = scale_y = 1.0
    else:
        try:
            scale_x, scale_y = float(canvas[0]), float(canvas[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise DataError("bad 'canvas' field") from exc
        if scale_x <= 0 or scale_y <= 0:
            raise DataError("canvas dimensions must be positive")
    objects = []
    for i, raw in enumerate(raw_objects):
        try:
            obj = PlacedObject(
                label=str(raw["class"]),
                box=Box(x=float(raw["x"]) / scale_x, y=float(raw["y"]) / scale_y,
                        w=float(raw["w"]) / scale_x, h=float(raw["h"]) / scale_y),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"object {i}: malformed box") from exc
        objects.append(obj)
    if not objects:
        raise DataError("record has no objects")
    return LayoutRecord(description=description, objects=tuple(objects))


@dataclass
class ParsedLayouts:
    records: list[LayoutRecord]
    label_vocab: LabelVocab
    text_vocab: TextVocab
    skipped: int
    total_lines: int


def parse_layout_dataset(
    path: str | Path,
    label_vocab: LabelVocab | None = None,
    text_vocab: TextVocab | None = None,
    max_malformed_fraction: float = 0.10,
) -> ParsedLayouts:
    """Read a JSONL layout dataset with skip-and-count error handling.

    Malformed lines are skipped and counted; more than
    ``max_malformed_fraction`` of lines skipped (or zero usable records) is
    fatal.  When ``label_vocab`` is supplied it is treated as FIXED: records
    naming unknown classes are skipped.  When it is None a fresh vocabulary
    is built by first appearance.  The text vocabulary, when not supplied,
    is built frequency-ordered over all parsed descriptions.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"layout dataset not found: {path}")
    fixed_labels = label_vocab is not None
    label_vocab = label_vocab if label_vocab is not None else LabelVocab()
    records: list[LayoutRecord] = []
    skipped = 0
    total_lines = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            total_lines += 1
            try:
                record = _record_from_dict(json.loads(line))
            except (json.JSONDecodeError, DataError):
                skipped += 1
                continue
            if fixed_labels and any(o.label not in label_vocab for o in record.objects):
                skipped += 1
                continue
            records.append(record)
            if not fixed_labels:
                for obj in record.objects:
                    label_vocab.add(obj.label)
    if not records:
        raise DataError(f"{path}: no usable records ({skipped} skipped of {total_lines})")
    if skipped > max_malformed_fraction * total_lines:
        raise DataError(f"{path}: {skipped} of {total_lines} lines malformed "
                        f"(over the {max_malformed_fraction:.0%} limit)")
    if text_vocab is None:
        text_vocab = TextVocab.from_texts(r.description for r in records)
    return ParsedLayouts(records=records, label_vocab=label_vocab,
                         text_vocab=text_vocab, skipped=skipped,
                         total_lines=total_lines)


def write_layout_dataset(path: str | Path, records: Sequence[LayoutRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            payload = {
                "description": record.description,
                "objects": [
                    {"class": o.label,
                     "x": round(o.box.x, 6), "y": round(o.box.y, 6),
                     "w": round(o.box.w, 6), "h": round(o.box.h, 6)}
                    for o in record.objects
                ],
            }
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
