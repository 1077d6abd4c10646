"""Synthetic desk-scale corpora: relational layouts and stroke families.

The layout generator emits two-object scenes from (subject, predicate,
object) triples; the predicate's ordering group decides which vertical band
each participant occupies, so the stated relation holds on 100% of samples
by construction.  Bands are deliberately narrow (centers near y=0.26 and
y=0.74): they concentrate ground-truth mass where a band-respecting
baseline is dense and a uniform-random baseline is not, which keeps the
model/heuristic/random overlap ordering statistically separable.

The stroke generator draws procedural shape families (lollipop tree, box
house, blob cloud) at exact target aspect ratios: vertices are jittered and
then affinely pinned to extents (1, r), so the ratio is exact up to float
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DataError
from .layout import Box, LayoutRecord, PlacedObject
from .relations import ABOVE, BELOW, PREDICATE_GROUPS
from .strokes import SketchRecord, make_sketch_record

__all__ = [
    "TripleSpec", "DEFAULT_TRIPLES", "render_description",
    "generate_synthetic_layout_corpus",
    "STROKE_FAMILIES", "generate_stroke_family", "generate_synthetic_stroke_corpus",
]

# Vertical band centers for the two participants (y grows downward).
UPPER_BAND = (0.22, 0.30)
LOWER_BAND = (0.70, 0.78)
X_RANGE = (0.40, 0.60)
X_OFFSET = 0.05
_MAX_RETRIES = 100


@dataclass(frozen=True)
class TripleSpec:
    """One relational prompt family with size priors and jitter ranges."""

    subject: str
    predicate: str
    object: str
    subject_w: tuple[float, float] = (0.16, 0.26)
    subject_h: tuple[float, float] = (0.10, 0.16)
    object_w: tuple[float, float] = (0.16, 0.26)
    object_h: tuple[float, float] = (0.10, 0.16)

    @property
    def group(self) -> str:
        key = tuple(self.predicate.split())
        if key not in PREDICATE_GROUPS:
            raise DataError(f"predicate {self.predicate!r} not in the relation lexicon")
        return PREDICATE_GROUPS[key]


DEFAULT_TRIPLES: tuple[TripleSpec, ...] = (
    TripleSpec("horse", "under", "tree"),
    TripleSpec("cloud", "above", "house"),
    # Small-subject prior: every apple box is strictly smaller than any tree box.
    TripleSpec("apple", "on", "tree",
               subject_w=(0.10, 0.15), subject_h=(0.07, 0.11),
               object_w=(0.18, 0.26), object_h=(0.12, 0.16)),
    TripleSpec("boat", "under", "bridge"),
)

_VOWELS = "aeiou"


def _article(word: str) -> str:
    return "an" if word[:1].lower() in _VOWELS else "a"


def render_description(triple: TripleSpec) -> str:
    """Fixed prompt template: article subject predicate article object."""
    return (f"{_article(triple.subject)} {triple.subject} {triple.predicate} "
            f"{_article(triple.object)} {triple.object}")


def _sample_box(rng: np.random.Generator, x_center: float,
                y_band: tuple[float, float],
                w_range: tuple[float, float], h_range: tuple[float, float]) -> Box:
    for _ in range(_MAX_RETRIES):
        x = float(np.clip(x_center + rng.uniform(-X_OFFSET, X_OFFSET), 0.0, 1.0))
        y = float(rng.uniform(*y_band))
        w = float(rng.uniform(*w_range))
        h = float(rng.uniform(*h_range))
        try:
            return Box(x=x, y=y, w=w, h=h)
        except DataError:
            continue
    raise DataError("could not sample an in-canvas box within retry budget")


def generate_synthetic_layout_corpus(
    n: int,
    seed: int,
    triples: Sequence[TripleSpec] = DEFAULT_TRIPLES,
) -> list[LayoutRecord]:
    """n two-object layouts cycling through the triples, subject listed first.

    For ABOVE-group predicates the subject occupies the upper band and the
    object the lower band; BELOW-group swaps them.  Horizontal positions
    are loosely stacked (object near the subject's x).
    """
    if n <= 0:
        raise DataError(f"corpus size must be positive, got {n}")
    if not triples:
        raise DataError("need at least one triple")
    rng = np.random.default_rng(seed)
    records: list[LayoutRecord] = []
    for i in range(n):
        triple = triples[i % len(triples)]
        group = triple.group
        if group == ABOVE:
            subject_band, object_band = UPPER_BAND, LOWER_BAND
        elif group == BELOW:
            subject_band, object_band = LOWER_BAND, UPPER_BAND
        else:
            raise DataError(f"layout corpus supports vertical relations only, "
                            f"got {group!r} for {triple.predicate!r}")
        x_anchor = float(rng.uniform(*X_RANGE))
        subject_box = _sample_box(rng, x_anchor, subject_band,
                                  triple.subject_w, triple.subject_h)
        object_box = _sample_box(rng, x_anchor, object_band,
                                 triple.object_w, triple.object_h)
        records.append(LayoutRecord(
            description=render_description(triple),
            objects=(
                PlacedObject(label=triple.subject, box=subject_box),
                PlacedObject(label=triple.object, box=object_box),
            ),
        ))
    return records


# ---------------------------------------------------------------------------
# Stroke families
# ---------------------------------------------------------------------------

def _resample_segments(points: np.ndarray, per_segment: int,
                       rng: np.random.Generator, jitter: float) -> np.ndarray:
    """Subdivide each segment and jitter the interior subdivision points."""
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        for k in range(1, per_segment + 1):
            t = k / per_segment
            p = a + t * (b - a)
            if k < per_segment:
                p = p + rng.normal(0.0, jitter, size=2)
            out.append(p)
    return np.asarray(out)


def _pin_extents(polylines: list[np.ndarray], r: float) -> list[np.ndarray]:
    """Affinely map ink extents onto exactly [0, 1] x [0, r]."""
    points = np.concatenate(polylines, axis=0)
    x_min, y_min = points[:, 0].min(), points[:, 1].min()
    x_max, y_max = points[:, 0].max(), points[:, 1].max()
    if x_max == x_min or y_max == y_min:
        raise DataError("degenerate shape extents")
    return [np.stack([(p[:, 0] - x_min) / (x_max - x_min),
                      (p[:, 1] - y_min) / (y_max - y_min) * r], axis=1)
            for p in polylines]


def _tree_polylines(r: float, rng: np.random.Generator) -> list[np.ndarray]:
    """Lollipop tree: triangular crown over a trunk line."""
    apex_x = 0.5 + rng.uniform(-0.08, 0.08)
    base_y = r * (0.55 + rng.uniform(-0.05, 0.05))
    crown = np.array([
        [apex_x, 0.0],
        [0.0, base_y],
        [1.0, base_y],
        [apex_x, 0.0],
    ])
    trunk_x = 0.5 + rng.uniform(-0.04, 0.04)
    trunk = np.array([[trunk_x, base_y], [trunk_x + rng.uniform(-0.03, 0.03), r]])
    jitter = 0.01
    polylines = [
        _resample_segments(crown, 3, rng, jitter),
        _resample_segments(trunk, 4, rng, jitter),
    ]
    return _pin_extents(polylines, r)


def _house_polylines(r: float, rng: np.random.Generator) -> list[np.ndarray]:
    """Box house with a triangular roof."""
    roof_y = r * (0.4 + rng.uniform(-0.05, 0.05))
    peak_x = 0.5 + rng.uniform(-0.06, 0.06)
    body = np.array([
        [0.05, roof_y], [0.05, r], [0.95, r], [0.95, roof_y], [0.05, roof_y],
    ])
    roof = np.array([[0.0, roof_y], [peak_x, 0.0], [1.0, roof_y]])
    jitter = 0.008
    polylines = [
        _resample_segments(body, 3, rng, jitter),
        _resample_segments(roof, 3, rng, jitter),
    ]
    return _pin_extents(polylines, r)


def _cloud_polylines(r: float, rng: np.random.Generator) -> list[np.ndarray]:
    """Lumpy closed blob: an ellipse with radial noise."""
    n = 24
    angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    radii = 1.0 + rng.uniform(-0.12, 0.12, size=n)
    xs = 0.5 + 0.5 * radii * np.cos(angles)
    ys = 0.5 + 0.5 * radii * np.sin(angles)
    blob = np.stack([xs, ys], axis=1)
    blob = np.concatenate([blob, blob[:1]], axis=0)
    blob[:, 1] *= r
    return _pin_extents([blob], r)


STROKE_FAMILIES: dict[str, Callable[[float, np.random.Generator], list[np.ndarray]]] = {
    "tree": _tree_polylines,
    "house": _house_polylines,
    "cloud": _cloud_polylines,
}


def generate_stroke_family(
    family: str,
    n: int,
    seed: int,
    r_range: tuple[float, float] = (0.4, 2.2),
) -> list[SketchRecord]:
    """n sketches of one family with aspect ratios uniform over r_range."""
    if family not in STROKE_FAMILIES:
        raise DataError(f"unknown stroke family {family!r}; "
                        f"known: {sorted(STROKE_FAMILIES)}")
    if n <= 0:
        raise DataError(f"corpus size must be positive, got {n}")
    rng = np.random.default_rng(seed)
    build = STROKE_FAMILIES[family]
    records = []
    for _ in range(n):
        r = float(rng.uniform(*r_range))
        records.append(make_sketch_record(build(r, rng), family))
    return records


def generate_synthetic_stroke_corpus(
    class_counts: dict[str, int],
    seed: int,
    r_range: tuple[float, float] = (0.4, 2.2),
) -> dict[str, list[SketchRecord]]:
    """Per-class sketch corpora from independent derived seeds."""
    corpora: dict[str, list[SketchRecord]] = {}
    for index, (family, count) in enumerate(sorted(class_counts.items())):
        child_seed = int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
        corpora[family] = generate_stroke_family(family, count, child_seed, r_range)
    return corpora
