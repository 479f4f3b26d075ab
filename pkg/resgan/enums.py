"""Enumerations for the lab."""
from enum import Enum


class _ValuesMixin:
    """Shared helpers for the string enums below."""

    @classmethod
    def values(cls):
        """Get list of all enum values."""
        return [member.value for member in cls]

    @classmethod
    def is_valid(cls, value):
        """Check if a value is a valid member value."""
        return value in cls.values()


class RunMode(_ValuesMixin, str, Enum):
    """
    Training mode.

    Inherits from str so values can be used directly as strings
    (e.g., in config documents and JSON logs).

    Usage:
        if config.mode == RunMode.COGAN:
            ...
    """
    RESEMBLED = 'resembled'
    COGAN = 'cogan'
    ABLATION_OMEGA0 = 'ablation_omega0'

    @classmethod
    def feature_modes(cls):
        """Modes that train feature discriminators and need a frozen encoder."""
        return [cls.RESEMBLED.value, cls.ABLATION_OMEGA0.value]


class FcMode(_ValuesMixin, str, Enum):
    """Reading of the feature covariance constraint."""
    CENTERED_DIFFERENCE = 'centered_difference'
    CONCATENATION = 'concatenation'


class AdversarialMode(_ValuesMixin, str, Enum):
    """Generator adversarial loss form."""
    NON_SATURATING = 'non_saturating'
    MINIMAX = 'minimax'


class NoiseKind(_ValuesMixin, str, Enum):
    """Corruption process of the denoising autoencoder."""
    GAUSSIAN = 'gaussian'
    SALT_PEPPER = 'salt_pepper'
    NONE = 'none'


class LatentDistribution(_ValuesMixin, str, Enum):
    """Prior over the shared latent z."""
    UNIFORM = 'uniform'
    STANDARD_NORMAL = 'standard_normal'


class ShapeClass(_ValuesMixin, str, Enum):
    """Shape families rendered into synthetic domains."""
    CIRCLE = 'circle'
    SQUARE = 'square'
    TRIANGLE = 'triangle'
    RING = 'ring'


class DatasetSource(_ValuesMixin, str, Enum):
    """Where a DomainDataset came from."""
    FOLDER = 'folder'
    SYNTHETIC = 'synthetic'
    AUGMENTED = 'augmented'


class CovarianceNorm(_ValuesMixin, str, Enum):
    """Matrix norm used by the covariance distance."""
    FROBENIUS = 'frobenius'
    L1 = 'l1'


class InterpolationPath(_ValuesMixin, str, Enum):
    """Latent walking path."""
    LINEAR = 'linear'
    SPHERICAL = 'spherical'


class DomainSide(_ValuesMixin, str, Enum):
    """One of the two domains."""
    X = 'x'
    Y = 'y'

    @property
    def other(self):
        """The opposite domain."""
        return DomainSide.Y if self is DomainSide.X else DomainSide.X


class MetricName(_ValuesMixin, str, Enum):
    """Metrics understood by the evaluate command."""
    MS_SSIM = 'ms_ssim'
    FEATURE_FID = 'feature_fid'
    COVARIANCE_DISTANCE = 'covariance_distance'
    ATTRIBUTE_CORRELATION = 'attribute_correlation'


class ErrorCategory(_ValuesMixin, str, Enum):
    """Machine-readable error categories and their process exit codes."""
    INTERNAL = 'internal'
    CONFIGURATION = 'configuration'
    DATA = 'data'
    SHAPE = 'shape'
    NUMERIC = 'numeric'
    STATISTICS = 'statistics'
    SIZE = 'size'
    TRAINING = 'training'
    DEPENDENCY = 'dependency'
    INTEGRITY = 'integrity'
    MIGRATION = 'migration'
    CAPABILITY = 'capability'

    @property
    def exit_code(self):
        """Nonzero exit status for this category."""
        return _EXIT_CODES[self]


_EXIT_CODES = {
    ErrorCategory.INTERNAL: 1,
    ErrorCategory.CONFIGURATION: 2,
    ErrorCategory.DATA: 3,
    ErrorCategory.SHAPE: 4,
    ErrorCategory.NUMERIC: 5,
    ErrorCategory.STATISTICS: 6,
    ErrorCategory.SIZE: 7,
    ErrorCategory.TRAINING: 8,
    ErrorCategory.DEPENDENCY: 9,
    ErrorCategory.INTEGRITY: 10,
    ErrorCategory.MIGRATION: 11,
    ErrorCategory.CAPABILITY: 12,
}


class Scenario(_ValuesMixin, str, Enum):
    """Synthetic domain pairings with known structural similarity."""
    HIGH_SIMILARITY = 'high_similarity'
    LOW_SIMILARITY = 'low_similarity'

    @property
    def shapes(self):
        """(shape_x, shape_y) rendered by this scenario."""
        if self is Scenario.HIGH_SIMILARITY:
            return ShapeClass.CIRCLE.value, ShapeClass.RING.value
        return ShapeClass.CIRCLE.value, ShapeClass.SQUARE.value
