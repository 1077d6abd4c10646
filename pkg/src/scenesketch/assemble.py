"""Scene assembly and rendering.

Takes a sampled layout, draws one sketch per box at the box's aspect ratio,
fits each sketch into its box with an exact anisotropic affine map, and
renders the stack as SVG (or flattened polyline JSON for thin clients).
Layer order is generation order: the first generated box is the bottom
layer.  Occlusion is deliberately not resolved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .composer.sample import LayoutScene
from .data.errors import DataError
from .data.layout import Box
from .data.strokes import SketchRecord, stroke5_to_polylines
from .rng import child_seed
from .sketcher.registry import SketcherRegistry
from .sketcher.sample import sample_sketch

__all__ = ["PlacedSketch", "SceneSketch", "fit_polylines_to_box",
           "fit_sketch_to_box", "assemble_scene", "render_svg",
           "scene_polylines_json", "CANVAS_PX"]

CANVAS_PX = 512


def _polyline_extent(polylines: Sequence[np.ndarray]) -> tuple[float, float, float, float]:
    points = np.concatenate([np.asarray(p, dtype=np.float64) for p in polylines])
    return (float(points[:, 0].min()), float(points[:, 0].max()),
            float(points[:, 1].min()), float(points[:, 1].max()))


def fit_polylines_to_box(polylines: Sequence[np.ndarray],
                         box: Box) -> list[np.ndarray]:
    """Anisotropically map the polylines' bounding extent onto the box.

    The mapped extent equals the box exactly, so applying the fit twice is
    the identity on already-fitted geometry.
    """
    if not polylines:
        raise DataError("cannot fit an empty sketch")
    min_x, max_x, min_y, max_y = _polyline_extent(polylines)
    dx, dy = max_x - min_x, max_y - min_y
    if dx <= 0.0 or dy <= 0.0:
        raise DataError(f"degenerate sketch extent (dx={dx}, dy={dy})")
    scale_x = box.w / dx
    scale_y = box.h / dy
    tx = box.left - min_x * scale_x
    ty = box.top - min_y * scale_y
    return [np.asarray(p, dtype=np.float64) * (scale_x, scale_y) + (tx, ty)
            for p in polylines]


@dataclass
class PlacedSketch:
    """A sketch mapped into its layout box."""

    sketch: SketchRecord
    label: str
    box: Box
    layer: int
    polylines: list[np.ndarray]  # absolute unit-canvas coordinates

    @property
    def extent(self) -> tuple[float, float, float, float]:
        return _polyline_extent(self.polylines)


@dataclass
class SceneSketch:
    """A fully assembled scene: placed sketches plus provenance."""

    placed: tuple[PlacedSketch, ...]
    description: str
    provenance: dict = field(default_factory=dict)


def fit_sketch_to_box(sketch: SketchRecord, box: Box, label: str | None = None,
                      layer: int = 0) -> PlacedSketch:
    """Fit a sketch record into a box, preserving polyline count and order."""
    polylines = stroke5_to_polylines(sketch.strokes)
    fitted = fit_polylines_to_box(polylines, box)
    return PlacedSketch(sketch=sketch, label=label or sketch.class_label,
                        box=box, layer=layer, polylines=fitted)


def assemble_scene(layout: LayoutScene, registry: SketcherRegistry,
                   temperature: float = 0.4, seed: int = 0,
                   object_seeds: Sequence[int] | None = None) -> SceneSketch:
    """Draw and place one sketch per layout box.

    Every class is resolved against the registry before any sampling, so a
    missing generator fails fast.  ``object_seeds`` overrides the derived
    per-object seeds (used to resketch a single object while keeping the
    rest byte-identical).
    """
    labels = [obj.label for obj in layout.objects]
    bundles = [registry.for_label(label) for label in labels]
    if object_seeds is None:
        object_seeds = [child_seed(seed, i) for i in range(len(labels))]
    elif len(object_seeds) != len(labels):
        raise DataError(f"got {len(object_seeds)} object seeds "
                        f"for {len(labels)} objects")

    placed = []
    for layer, (obj, bundle) in enumerate(zip(layout.objects, bundles)):
        ratio = obj.box.h / obj.box.w
        record = sample_sketch(bundle, ratio=ratio, temperature=temperature,
                               seed=int(object_seeds[layer]))
        placed.append(fit_sketch_to_box(record, obj.box, label=obj.label,
                                        layer=layer))
    provenance = {
        "description": layout.description,
        "layout_seed": layout.seed,
        "layout_temperature": layout.temperature,
        "layout_source": layout.source,
        "sketch_seed": int(seed),
        "object_seeds": [int(s) for s in object_seeds],
        "sketch_temperature": float(temperature),
    }
    return SceneSketch(placed=tuple(placed), description=layout.description,
                       provenance=provenance)


def _fmt(value: float) -> str:
    """Fixed float formatting so identical scenes render identical bytes."""
    return f"{value:.3f}"


def render_svg(scene: SceneSketch) -> str:
    """Render to a 512x512 SVG, one path per pen-down polyline."""
    provenance = json.dumps(scene.provenance, sort_keys=True)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{CANVAS_PX}" height="{CANVAS_PX}" '
        f'viewBox="0 0 {CANVAS_PX} {CANVAS_PX}">',
        f"<!-- provenance: {provenance} -->",
        f'<rect width="{CANVAS_PX}" height="{CANVAS_PX}" fill="white"/>',
    ]
    for placed in sorted(scene.placed, key=lambda p: p.layer):
        lines.append(f'<g data-label="{placed.label}" data-layer="{placed.layer}">')
        for poly in placed.polylines:
            px = poly * CANVAS_PX
            coords = " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in px)
            lines.append(f'<path d="M {coords}" fill="none" stroke="black" '
                         'stroke-width="2" stroke-linecap="round" '
                         'stroke-linejoin="round"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scene_polylines_json(scene: SceneSketch) -> dict:
    """Flattened polylines (unit canvas coordinates) for thin clients."""
    return {
        "description": scene.description,
        "canvas_px": CANVAS_PX,
        "objects": [
            {
                "label": placed.label,
                "layer": placed.layer,
                "box": {"x": placed.box.x, "y": placed.box.y,
                        "w": placed.box.w, "h": placed.box.h},
                "polylines": [[[round(float(x), 6), round(float(y), 6)]
                               for x, y in poly]
                              for poly in placed.polylines],
            }
            for placed in sorted(scene.placed, key=lambda p: p.layer)
        ],
        "provenance": scene.provenance,
    }
