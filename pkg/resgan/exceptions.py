"""Error hierarchy.

Every error raised on purpose by the lab is a ``LabError``. It subclasses
``ValueError`` so callers can keep catching ``ValueError`` at the edges, and it
carries an ``ErrorCategory`` that the CLI turns into an exit status.
"""
from resgan.enums import ErrorCategory


class LabError(ValueError):
    """Base class for all expected failures."""
    category = ErrorCategory.INTERNAL

    def to_dict(self):
        return {'category': self.category.value, 'message': str(self)}


class ConfigurationError(LabError):
    category = ErrorCategory.CONFIGURATION


class DataError(LabError):
    category = ErrorCategory.DATA


class ShapeError(LabError):
    category = ErrorCategory.SHAPE


class NumericError(LabError):
    category = ErrorCategory.NUMERIC


class StatisticsError(LabError):
    category = ErrorCategory.STATISTICS


class SizeError(LabError):
    category = ErrorCategory.SIZE


class TrainingError(LabError):
    """
    Training diverged.

    Args:
        message: What went wrong
        last_finite_state: Parameters (state dict) from the last step whose loss was finite
        snapshot: Optional diagnostic record (loss breakdown, iteration)
    """
    category = ErrorCategory.TRAINING

    def __init__(self, message, last_finite_state=None, snapshot=None):
        super().__init__(message)
        self.last_finite_state = last_finite_state
        self.snapshot = snapshot or {}


class DependencyError(LabError):
    category = ErrorCategory.DEPENDENCY


class IntegrityError(LabError):
    category = ErrorCategory.INTEGRITY


class MigrationError(LabError):
    category = ErrorCategory.MIGRATION


class CapabilityError(LabError):
    category = ErrorCategory.CAPABILITY
