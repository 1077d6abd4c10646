"""Text-conditioned layout composer: model, losses, training, sampling."""

from .losses import class_loss, composer_losses, flag_loss, mdn_nll, weighted_total
from .model import (ComposerConfig, ComposerOutputs, MdnParams, RHO_GUARD,
                    composer_forward, init_composer_params, size_head_params,
                    sinusoidal_positions)
from .sample import (ComposerBundle, LayoutScene, autocomplete_layout,
                     bundle_from_result, candidate_seed, load_composer,
                     sample_layout, sample_layout_candidates)
from .train import (ComposerTrainResult, LOSS_FIELDS, TrainingArrays,
                    build_training_arrays, train_composer, write_loss_csv)

__all__ = [
    "ComposerConfig", "ComposerOutputs", "MdnParams", "RHO_GUARD",
    "composer_forward", "init_composer_params", "size_head_params",
    "sinusoidal_positions",
    "mdn_nll", "flag_loss", "class_loss", "composer_losses", "weighted_total",
    "ComposerTrainResult", "TrainingArrays", "LOSS_FIELDS",
    "build_training_arrays", "train_composer", "write_loss_csv",
    "ComposerBundle", "LayoutScene", "load_composer", "bundle_from_result",
    "sample_layout", "sample_layout_candidates", "autocomplete_layout",
    "candidate_seed",
]
