"""Stroke-5 sketch encoding and the polyline codec.

A sketch is a list of polylines (each an ``(N, 2)`` float array of absolute
points, x rightward, y downward).  The stroke-5 form is a ``(T, 5)`` array
of rows ``(dx, dy, p_down, p_up, p_end)``: the pen moves by the offset, and
the one-hot state says whether that move drew ink (``p_down``), traveled
between polylines (``p_up``), or terminated the sketch (``p_end``, final
row only, zero offset).  Offsets are normalized so the sketch's larger ink
extent equals 1; the first point of the first polyline is the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "SketchRecord", "make_sketch_record",
    "aspect_ratio", "polylines_to_stroke5", "stroke5_to_polylines",
    "validate_stroke5",
    "parse_stroke_dataset", "write_stroke_dataset",
]


@dataclass
class SketchRecord:
    """A stroke-5 sketch plus its class and achieved aspect ratio."""

    strokes: np.ndarray  # (T, 5) float64
    class_label: str
    aspect_ratio: float  # vertical ink extent / horizontal ink extent
    truncated: bool = False
    metadata: dict = field(default_factory=dict)


def _clean_polylines(polylines: Sequence) -> list[np.ndarray]:
    cleaned = []
    for poly in polylines:
        arr = np.asarray(poly, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DataError(f"polyline must be (N, 2), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("polyline contains non-finite coordinates")
        if arr.shape[0] >= 2:
            cleaned.append(arr)
    return cleaned


def _extents(polylines: Sequence[np.ndarray]) -> tuple[float, float]:
    points = np.concatenate(list(polylines), axis=0)
    dx = float(points[:, 0].max() - points[:, 0].min())
    dy = float(points[:, 1].max() - points[:, 1].min())
    return dx, dy


def aspect_ratio(polylines: Sequence) -> float:
    """Vertical over horizontal ink extent; both must be nonzero."""
    cleaned = _clean_polylines(polylines)
    if not cleaned:
        raise DataError("sketch has no polyline with at least two points")
    dx, dy = _extents(cleaned)
    if dx == 0.0 or dy == 0.0:
        raise DataError(f"degenerate ink extent (dx={dx}, dy={dy})")
    return dy / dx


def polylines_to_stroke5(polylines: Sequence) -> np.ndarray:
    """Encode polylines as normalized stroke-5 offsets.

    Single-point polylines carry no ink and are dropped.  The sketch must
    retain nonzero extent on both axes after dropping them.
    """
    cleaned = _clean_polylines(polylines)
    if not cleaned:
        raise DataError("sketch has no polyline with at least two points")
    dx, dy = _extents(cleaned)
    if dx == 0.0 or dy == 0.0:
        raise DataError(f"degenerate ink extent (dx={dx}, dy={dy})")
    scale = 1.0 / max(dx, dy)

    rows = []
    previous = cleaned[0][0]
    for index, poly in enumerate(cleaned):
        if index > 0:
            jump = (poly[0] - previous) * scale
            rows.append((jump[0], jump[1], 0.0, 1.0, 0.0))
            previous = poly[0]
        for point in poly[1:]:
            step = (point - previous) * scale
            rows.append((step[0], step[1], 1.0, 0.0, 0.0))
            previous = point
    rows.append((0.0, 0.0, 0.0, 0.0, 1.0))
    return np.asarray(rows, dtype=np.float64)


def stroke5_to_polylines(strokes: np.ndarray) -> list[np.ndarray]:
    """Decode stroke-5 rows into absolute polylines starting at the origin."""
    strokes = np.asarray(strokes, dtype=np.float64)
    validate_stroke5(strokes)
    polylines: list[list[np.ndarray]] = [[np.zeros(2)]]
    position = np.zeros(2)
    for row in strokes:
        if row[4] >= 0.5:
            break
        position = position + row[:2]
        if row[2] >= 0.5:
            polylines[-1].append(position.copy())
        else:
            polylines.append([position.copy()])
    return [np.asarray(poly) for poly in polylines if len(poly) >= 2]


def validate_stroke5(strokes: np.ndarray) -> None:
    strokes = np.asarray(strokes)
    if strokes.ndim != 2 or strokes.shape[1] != 5:
        raise DataError(f"stroke array must be (T, 5), got {strokes.shape}")
    if strokes.shape[0] == 0:
        raise DataError("stroke array is empty")
    if not np.all(np.isfinite(strokes)):
        raise DataError("stroke array contains non-finite values")
    states = strokes[:, 2:]
    if not np.all((states == 0.0) | (states == 1.0)) or not np.all(states.sum(axis=1) == 1.0):
        raise DataError("pen states must be one-hot over (down, up, end)")
    end_rows = np.flatnonzero(strokes[:, 4] == 1.0)
    if end_rows.size > 0 and end_rows[0] != strokes.shape[0] - 1:
        raise DataError("p_end may only be set on the final row")


def _achieved_ratio(strokes: np.ndarray) -> float:
    polylines = stroke5_to_polylines(strokes)
    return aspect_ratio(polylines)


def make_sketch_record(
    polylines: Sequence, class_label: str, truncated: bool = False
) -> SketchRecord:
    """Encode polylines and record the post-normalization extent ratio."""
    strokes = polylines_to_stroke5(polylines)
    return SketchRecord(
        strokes=strokes,
        class_label=class_label,
        aspect_ratio=_achieved_ratio(strokes),
        truncated=truncated,
    )


def parse_stroke_dataset(path: str | Path, class_label: str) -> list[SketchRecord]:
    """Read a JSONL file where each line is a list of absolute polylines.

    Records whose ink is degenerate (fewer than two points, or zero extent
    on either axis) are skipped.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"stroke dataset not found: {path}")
    records: list[SketchRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                polylines = json.loads(line)
            except json.JSONDecodeError:
                continue
            try:
                records.append(make_sketch_record(polylines, class_label))
            except DataError:
                continue
    if not records:
        raise DataError(f"{path}: no usable stroke records")
    return records


def write_stroke_dataset(path: str | Path, sketches: Sequence[Sequence]) -> None:
    """Write one JSON list of polylines per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for polylines in sketches:
            serializable = [np.asarray(p, dtype=np.float64).round(6).tolist()
                            for p in polylines]
            fh.write(json.dumps(serializable) + "\n")
