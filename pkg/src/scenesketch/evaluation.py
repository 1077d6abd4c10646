"""Quantitative layout evaluation.

Monte-Carlo overlap against semantically matched ground-truth layouts, a
band-placement heuristic baseline, a uniform random baseline, and spatial
heat-maps built by superimposing box interiors on a grid.

Overlap semantics: points are sampled uniformly inside each *generated*
box and a point scores if it falls inside at least one ground-truth box
(union semantics — the only reading that is monotone in ground-truth
coverage).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .composer.sample import ComposerBundle, sample_layout
from .data.errors import DataError
from .data.layout import Box, LayoutRecord, PlacedObject
from .data.relations import ABOVE, BELOW, Relation, extract_relation
from .kernels import count_points_in_union, heatmap_accumulate
from .rng import child_seed, derived_seed

__all__ = [
    "Heatmap", "OverlapRow", "OverlapReport",
    "semantic_filter", "mc_overlap",
    "heuristic_baseline", "random_baseline",
    "build_heatmap", "write_heatmap_png", "write_heatmap_csv",
    "run_eval",
]

# Band placement used by the heuristic baseline: the subject's y-center is
# drawn from one band, the object's from the complementary band.
_UPPER_Y = (0.15, 0.35)
_LOWER_Y = (0.65, 0.85)
_BASELINE_X = (0.3, 0.7)
_BASELINE_SIZE = (0.2, 0.6)


def _as_relation(query: Relation | str) -> Relation:
    if isinstance(query, Relation):
        return query
    relation = extract_relation(query)
    if relation is None:
        raise DataError(f"no spatial relation found in {query!r}")
    return relation


def semantic_filter(dataset: Sequence[LayoutRecord],
                    query: Relation | str) -> list[LayoutRecord]:
    """Layouts whose (subject, relation group, object) matches the query.

    An empty result is a valid empty list, not an error.
    """
    target = _as_relation(query)
    matches = []
    for record in dataset:
        found = extract_relation(record.description)
        if (found is not None
                and found.subject == target.subject
                and found.group == target.group
                and found.object == target.object):
            matches.append(record)
    return matches


def _layout_boxes(layout) -> list[Box]:
    return [obj.box for obj in layout.objects]


def _boxes_array(layouts: Sequence) -> np.ndarray:
    boxes = [box.as_array() for layout in layouts for box in _layout_boxes(layout)]
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.stack(boxes)


def mc_overlap(generated: Sequence, ground_truth: Sequence,
               points_per_box: int = 1000, seed: int = 0) -> float:
    """Percent of points sampled in generated boxes that land in any GT box."""
    gen_boxes = _boxes_array(generated)
    gt_boxes = _boxes_array(ground_truth)
    if gen_boxes.shape[0] == 0:
        raise DataError("overlap metric needs at least one generated box")
    if gt_boxes.shape[0] == 0:
        raise DataError("overlap metric needs at least one ground-truth box")
    if points_per_box < 1:
        raise DataError(f"points_per_box must be positive, got {points_per_box}")

    rng = np.random.default_rng(int(seed))
    inside = 0
    total = 0
    for cx, cy, w, h in gen_boxes:
        px = rng.uniform(cx - w / 2.0, cx + w / 2.0, size=points_per_box)
        py = rng.uniform(cy - h / 2.0, cy + h / 2.0, size=points_per_box)
        inside += count_points_in_union(px, py, gt_boxes)
        total += points_per_box
    return 100.0 * inside / total


def _band_box(rng: np.random.Generator, y_band: tuple[float, float]) -> Box:
    return Box(
        x=float(rng.uniform(*_BASELINE_X)),
        y=float(rng.uniform(*y_band)),
        w=float(rng.uniform(*_BASELINE_SIZE)),
        h=float(rng.uniform(*_BASELINE_SIZE)),
    )


def heuristic_baseline(query: Relation | str, n: int,
                       seed: int = 0) -> list[LayoutRecord]:
    """Vertical-band baseline: subject in its relation's band, object opposite.

    Only above/below-group relations are placeable; anything else errors.
    """
    relation = _as_relation(query)
    if relation.group == ABOVE:
        subject_band, object_band = _UPPER_Y, _LOWER_Y
    elif relation.group == BELOW:
        subject_band, object_band = _LOWER_Y, _UPPER_Y
    else:
        raise DataError(
            f"heuristic baseline cannot place relation group {relation.group!r}; "
            "only above/below-group predicates are supported")
    rng = np.random.default_rng(int(seed))
    layouts = []
    description = f"{relation.subject} {relation.group} {relation.object}"
    for _ in range(n):
        layouts.append(LayoutRecord(
            description=description,
            objects=(
                PlacedObject(relation.subject, _band_box(rng, subject_band)),
                PlacedObject(relation.object, _band_box(rng, object_band)),
            ),
        ))
    return layouts


def random_baseline(n: int, seed: int = 0,
                    labels: tuple[str, str] = ("subject", "object")) -> list[LayoutRecord]:
    """Two fully in-canvas boxes per layout, all coordinates uniform."""
    rng = np.random.default_rng(int(seed))

    def random_box() -> Box:
        w = float(rng.uniform(0.1, 0.6))
        h = float(rng.uniform(0.1, 0.6))
        return Box(
            x=float(rng.uniform(w / 2.0, 1.0 - w / 2.0)),
            y=float(rng.uniform(h / 2.0, 1.0 - h / 2.0)),
            w=w, h=h,
        )

    return [
        LayoutRecord(
            description="random",
            objects=(PlacedObject(labels[0], random_box()),
                     PlacedObject(labels[1], random_box())),
        )
        for _ in range(n)
    ]


@dataclass
class Heatmap:
    """Per-cell count of boxes covering the cell center; y grows downward."""

    grid: np.ndarray  # (resolution, resolution) float64
    resolution: int
    slot: str
    box_count: int

    @property
    def mass(self) -> float:
        return float(self.grid.sum())


def _slot_box(layout, slot: str, relation: Relation | None) -> Box | None:
    if relation is not None:
        wanted = relation.subject if slot == "subject" else relation.object
        for obj in layout.objects:
            if obj.label == wanted:
                return obj.box
        return None
    index = 0 if slot == "subject" else 1
    if len(layout.objects) <= index:
        return None
    return layout.objects[index].box


def build_heatmap(layouts: Sequence, slot: str, resolution: int = 64,
                  relation: Relation | None = None) -> Heatmap:
    """Superimpose the selected slot's box interiors onto a grid.

    ``slot`` is "subject" or "object".  With a relation, boxes are selected
    by label (first occurrence); otherwise positionally (first/second
    object).  Layouts missing the slot are skipped.
    """
    if slot not in ("subject", "object"):
        raise DataError(f"slot must be 'subject' or 'object', got {slot!r}")
    boxes = []
    for layout in layouts:
        box = _slot_box(layout, slot, relation)
        if box is not None:
            boxes.append(box.as_array())
    arr = np.stack(boxes) if boxes else np.zeros((0, 4), dtype=np.float64)
    grid = heatmap_accumulate(arr, resolution)
    return Heatmap(grid=grid, resolution=resolution, slot=slot,
                   box_count=len(boxes))


def write_heatmap_png(heatmap: Heatmap, path: str | Path) -> None:
    """Grayscale PNG, white = densest cell, black = empty."""
    from PIL import Image

    grid = heatmap.grid
    peak = grid.max()
    scaled = (grid / peak * 255.0) if peak > 0 else grid
    image = Image.fromarray(scaled.astype(np.uint8), mode="L")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    image.save(path, format="PNG")


def write_heatmap_csv(heatmap: Heatmap, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, heatmap.grid, fmt="%.6g", delimiter=",")


@dataclass
class OverlapRow:
    prompt: str
    model_pct: float
    heuristic_pct: float
    random_pct: float


@dataclass
class OverlapReport:
    rows: list[OverlapRow]
    layouts_per_prompt: int
    points_per_box: int
    seed: int
    csv_path: Path | None = None
    heatmap_paths: list[Path] = field(default_factory=list)


def _prompt_slug(prompt: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", prompt.lower()).strip("-")


def write_overlap_csv(report: OverlapReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prompt", "model_pct", "heuristic_pct", "random_pct"])
        for row in report.rows:
            writer.writerow([row.prompt, f"{row.model_pct:.2f}",
                             f"{row.heuristic_pct:.2f}", f"{row.random_pct:.2f}"])
    return path


def run_eval(bundle: ComposerBundle, dataset: Sequence[LayoutRecord],
             prompts: Sequence[str], layouts_per_prompt: int = 100,
             points_per_box: int = 1000, temperature: float = 0.4,
             seed: int = 0, out_dir: str | Path | None = None,
             heatmap_resolution: int = 64) -> OverlapReport:
    """Per-prompt overlap of model vs. heuristic vs. random baselines.

    For each prompt: semantically matched dataset layouts are the ground
    truth; the model samples ``layouts_per_prompt`` scenes from derived
    child seeds; both baselines draw the same number of layouts.  Writes
    the report CSV plus model/ground-truth heatmaps per prompt when
    ``out_dir`` is given.
    """
    eval_seed = derived_seed(seed, "eval")
    report = OverlapReport(rows=[], layouts_per_prompt=layouts_per_prompt,
                           points_per_box=points_per_box, seed=int(seed))
    out = Path(out_dir) if out_dir is not None else None

    for prompt_index, prompt in enumerate(prompts):
        relation = _as_relation(prompt)
        ground_truth = semantic_filter(dataset, relation)
        if not ground_truth:
            raise DataError(f"no ground-truth layouts match prompt {prompt!r}")

        prompt_seed = child_seed(eval_seed, prompt_index)
        model_layouts = [
            sample_layout(bundle, prompt, seed=child_seed(prompt_seed, i),
                          temperature=temperature)
            for i in range(layouts_per_prompt)
        ]
        heuristic_layouts = heuristic_baseline(
            relation, layouts_per_prompt, seed=child_seed(prompt_seed, 10_001))
        random_layouts = random_baseline(
            layouts_per_prompt, seed=child_seed(prompt_seed, 10_002))

        mc_seed = child_seed(prompt_seed, 10_003)
        row = OverlapRow(
            prompt=prompt,
            model_pct=mc_overlap(model_layouts, ground_truth,
                                 points_per_box, seed=child_seed(mc_seed, 0)),
            heuristic_pct=mc_overlap(heuristic_layouts, ground_truth,
                                     points_per_box, seed=child_seed(mc_seed, 1)),
            random_pct=mc_overlap(random_layouts, ground_truth,
                                  points_per_box, seed=child_seed(mc_seed, 2)),
        )
        report.rows.append(row)

        if out is not None:
            slug = _prompt_slug(prompt)
            for source_name, layouts in (("model", model_layouts),
                                          ("truth", ground_truth)):
                for slot in ("subject", "object"):
                    heatmap = build_heatmap(layouts, slot, heatmap_resolution,
                                            relation=relation)
                    base = out / f"heatmap_{slug}_{source_name}_{slot}"
                    write_heatmap_png(heatmap, base.with_suffix(".png"))
                    write_heatmap_csv(heatmap, base.with_suffix(".csv"))
                    report.heatmap_paths.extend(
                        [base.with_suffix(".png"), base.with_suffix(".csv")])

    if out is not None:
        report.csv_path = write_overlap_csv(report, out / "overlap_report.csv")
    return report
