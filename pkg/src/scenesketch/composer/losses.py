"""Training losses for the layout composer.

Each loss returns the **sum over masked steps and batch rows** as a scalar
graph node; callers divide by the batch size when they want a per-sequence
average.  Masks are float 0/1 arrays of shape (B, T):

* position / size / class terms are masked to steps whose *target* is a box;
* the flag term covers every step up to and including the end token.
"""

from __future__ import annotations

import numpy as np

from ..engine import Tensor, ops
from ..mixtures import mdn_nll, sequence_cross_entropy
from .model import ComposerConfig, ComposerOutputs

__all__ = ["mdn_nll", "flag_loss", "class_loss", "composer_losses", "weighted_total"]


def flag_loss(flag_logits: Tensor, target_flags: np.ndarray,
              mask: np.ndarray) -> Tensor:
    """Cross-entropy of the box/start/end flag over all masked steps."""
    return sequence_cross_entropy(flag_logits, target_flags, mask)


def class_loss(class_logits: Tensor, target_labels: np.ndarray,
               mask: np.ndarray) -> Tensor:
    """Cross-entropy of object classes over box steps."""
    return sequence_cross_entropy(class_logits, target_labels, mask)


def weighted_total(parts: dict[str, Tensor], config: ComposerConfig) -> Tensor:
    return (ops.wrap(config.lambda_xy) * parts["L_xy"]
            + ops.wrap(config.lambda_wh) * parts["L_wh"]
            + ops.wrap(config.lambda_p) * parts["L_p"]
            + ops.wrap(config.lambda_class) * parts["L_class"])


def composer_losses(
    outputs: ComposerOutputs,
    config: ComposerConfig,
    target_coords: np.ndarray,   # (B, T, 4)
    target_labels: np.ndarray,   # (B, T)
    target_flags: np.ndarray,    # (B, T)
    step_mask: np.ndarray,       # (B, T) all steps through the end token
    box_mask: np.ndarray,        # (B, T) steps whose target is a box
) -> dict[str, Tensor]:
    parts = {
        "L_xy": mdn_nll(outputs.mdn_xy, target_coords[:, :, 0:2], box_mask),
        "L_wh": mdn_nll(outputs.mdn_wh, target_coords[:, :, 2:4], box_mask),
        "L_p": flag_loss(outputs.flag_logits, target_flags, step_mask),
        "L_class": class_loss(outputs.class_logits, target_labels, box_mask),
    }
    parts["L_SC"] = weighted_total(parts, config)
    return parts
