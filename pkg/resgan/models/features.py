"""Feature-space records: feature batches and Gaussian feature statistics."""
from dataclasses import dataclass

import numpy as np

from resgan.exceptions import NumericError, ShapeError, StatisticsError

PSD_RELATIVE_TOLERANCE = 1e-6


def as_feature_matrix(features, what='features'):
    """Return ``features`` as a finite float64 B x d matrix."""
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise ShapeError(f"{what} must be a B x d matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NumericError(f"{what} contain non-finite entries")
    return matrix


@dataclass(frozen=True)
class FeatureStats:
    """
    Mean and covariance of a feature distribution.

    Covariance uses the unbiased estimator (divisor n - 1) and is symmetrized
    on construction so Σ == Σᵀ holds exactly.
    """
    mean: np.ndarray
    covariance: np.ndarray
    n: int

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64).reshape(-1)
        covariance = np.ascontiguousarray(self.covariance, dtype=np.float64)
        if covariance.ndim == 0 and mean.shape == (1,):
            covariance = covariance.reshape(1, 1)
        if covariance.shape != (mean.shape[0], mean.shape[0]):
            raise ShapeError(
                f"Covariance shape {covariance.shape} does not match mean of length {mean.shape[0]}"
            )
        if self.n < 2:
            raise StatisticsError(f"FeatureStats need n >= 2, got {self.n}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(covariance))):
            raise NumericError("FeatureStats contain non-finite entries")
        covariance = 0.5 * (covariance + covariance.T)
        mean.flags.writeable = False
        covariance.flags.writeable = False
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', covariance)
        object.__setattr__(self, 'n', int(self.n))

    @classmethod
    def from_features(cls, features):
        """Estimate stats from an n x d feature matrix (n >= 2)."""
        matrix = as_feature_matrix(features)
        n = matrix.shape[0]
        if n < 2:
            raise StatisticsError(f"At least 2 feature rows are needed for a covariance, got {n}")
        mean = matrix.mean(axis=0)
        centered = matrix - mean
        covariance = centered.T @ centered / (n - 1)
        return cls(mean=mean, covariance=covariance, n=n)

    @property
    def dim(self):
        return int(self.mean.shape[0])

    def is_psd(self, tolerance=PSD_RELATIVE_TOLERANCE):
        """True when the smallest eigenvalue is >= -tolerance * largest magnitude."""
        eigenvalues = np.linalg.eigvalsh(self.covariance)
        scale = max(float(np.abs(eigenvalues).max()), 1.0)
        return bool(eigenvalues.min() >= -tolerance * scale)

    def to_dict(self):
        return {'dim': self.dim, 'n': self.n}

    def __repr__(self):
        return f'<FeatureStats d={self.dim} n={self.n}>'


# Fréchet distance works on the same record.
GaussianStats = FeatureStats
