"""Class-to-checkpoint registry for stroke generators.

A JSON manifest maps object classes to checkpoint files (paths are
resolved relative to the manifest's directory) and may name a fallback
class for labels without their own model:

    {"classes": {"tree": "sketcher_tree.ckpt", ...}, "fallback": "tree"}

All checkpoints load eagerly, so a bad manifest fails at load time rather
than mid-scene.  ``ensure_covers`` lets callers verify, again at load time,
that every label a layout model can emit resolves to some generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .sample import SketcherBundle, load_sketcher

__all__ = ["RegistryError", "SketcherRegistry", "load_registry",
           "write_registry_manifest"]


class RegistryError(Exception):
    """A class label has no stroke generator and no fallback applies."""


@dataclass
class SketcherRegistry:
    sketchers: dict[str, SketcherBundle]
    fallback: str | None = None

    def for_label(self, label: str) -> SketcherBundle:
        if label in self.sketchers:
            return self.sketchers[label]
        if self.fallback is not None:
            return self.sketchers[self.fallback]
        raise RegistryError(f"no stroke generator for class {label!r} "
                            "and the registry declares no fallback")

    def ensure_covers(self, labels: Iterable[str]) -> None:
        """Raise unless every label resolves (directly or via fallback)."""
        if self.fallback is not None:
            return
        missing = sorted(set(labels) - set(self.sketchers))
        if missing:
            raise RegistryError(
                f"classes {missing} have no stroke generator and the "
                "registry declares no fallback")

    @property
    def labels(self) -> list[str]:
        return sorted(self.sketchers)


def load_registry(manifest_path: str | Path) -> SketcherRegistry:
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise RegistryError(f"registry manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry manifest is not valid JSON: {exc}") from exc
    classes = manifest.get("classes")
    if not isinstance(classes, dict) or not classes:
        raise RegistryError("registry manifest needs a non-empty 'classes' map")
    base = manifest_path.parent
    sketchers = {label: load_sketcher(base / rel)
                 for label, rel in sorted(classes.items())}
    fallback = manifest.get("fallback")
    if fallback is not None and fallback not in sketchers:
        raise RegistryError(f"fallback class {fallback!r} is not in the manifest")
    return SketcherRegistry(sketchers=sketchers, fallback=fallback)


def write_registry_manifest(path: str | Path,
                            classes: Mapping[str, str | Path],
                            fallback: str | None = None) -> Path:
    """Write a manifest; checkpoint paths are stored relative to it."""
    path = Path(path)
    rel = {label: str(Path(p).resolve().relative_to(path.parent.resolve()))
           if Path(p).is_absolute() else str(p)
           for label, p in sorted(classes.items())}
    doc = {"classes": rel}
    if fallback is not None:
        doc["fallback"] = fallback
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
