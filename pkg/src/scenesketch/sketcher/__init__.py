"""Stroke generator: model, training, sampling, class registry."""

from .model import (SketcherConfig, init_sketcher_params, lstm_cell,
                    sketcher_forward, sketcher_step)
from .registry import (RegistryError, SketcherRegistry, load_registry,
                       write_registry_manifest)
from .sample import (SketcherBundle, load_sketcher, sample_sketch,
                     sketcher_bundle_from_result)
from .train import (SKETCH_LOSS_FIELDS, SketcherTrainResult, StrokeArrays,
                    build_stroke_arrays, sketch_losses, train_sketcher,
                    write_sketch_loss_csv)

__all__ = [
    "SketcherConfig", "init_sketcher_params", "sketcher_forward",
    "sketcher_step", "lstm_cell",
    "SketcherTrainResult", "StrokeArrays", "SKETCH_LOSS_FIELDS",
    "build_stroke_arrays", "sketch_losses", "train_sketcher",
    "write_sketch_loss_csv",
    "SketcherBundle", "load_sketcher", "sample_sketch",
    "sketcher_bundle_from_result",
    "RegistryError", "SketcherRegistry", "load_registry",
    "write_registry_manifest",
]
