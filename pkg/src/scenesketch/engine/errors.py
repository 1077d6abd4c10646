"""Exception hierarchy for the numeric engine."""


class EngineError(Exception):
    """Base class for all engine failures."""


class ShapeError(EngineError):
    """Operands have incompatible shapes for the requested operation."""


class GradError(EngineError):
    """Backward pass was invoked in an invalid way (non-scalar loss, dead tape)."""


class TrainingError(EngineError):
    """Optimizer encountered a non-finite gradient or inconsistent state."""


class CheckpointError(EngineError):
    """Checkpoint file is missing, corrupt, or inconsistent with its manifest."""
