"""Numeric engine: tensors, tape, primitives, optimizer, checks, checkpoints."""

from . import ops
from .checkpoint import Checkpoint, config_hash, load_checkpoint, save_checkpoint
from .errors import (
    CheckpointError,
    EngineError,
    GradError,
    ShapeError,
    TrainingError,
)
from .gradcheck import GradCheckReport, grad_check
from .optim import AdamState, adam_step, clip_gradients, global_norm
from .tensor import Node, Tape, Tensor, backward

__all__ = [
    "ops",
    "Tensor", "Tape", "Node", "backward",
    "AdamState", "adam_step", "clip_gradients", "global_norm",
    "GradCheckReport", "grad_check",
    "Checkpoint", "save_checkpoint", "load_checkpoint", "config_hash",
    "EngineError", "ShapeError", "GradError", "TrainingError", "CheckpointError",
]
