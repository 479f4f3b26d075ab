"""Evaluation metrics: MS-SSIM diversity, Fréchet distance, covariance distance."""
import logging

import numpy as np
import scipy.linalg
import torch
import torch.nn.functional as F

from resgan.enums import CovarianceNorm, MetricName
from resgan.exceptions import ConfigurationError, NumericError, ShapeError, SizeError, StatisticsError
from resgan.logging_config import log_performance
from resgan.models.features import FeatureStats, as_feature_matrix
from resgan.models.report import MetricReport
from resgan.services.feature_service import FeatureService
from resgan.utils.seeding import numpy_rng

logger = logging.getLogger(__name__)

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MAX_WINDOW = 11
MIN_SCALE_SIDE = 7
GAUSSIAN_SIGMA = 1.5
K1, K2 = 0.01, 0.03
LUMA = (0.299, 0.587, 0.114)
PAIR_CHUNK = 256
FID_NEGATIVE_TOLERANCE = 1e-6


# ==========================================
# MS-SSIM
# ==========================================

def gaussian_window(size, sigma=GAUSSIAN_SIGMA):
    """Normalized 1-D Gaussian of odd length ``size``."""
    coords = torch.arange(size, dtype=torch.float64) - size // 2
    g = torch.exp(-(coords ** 2) / (2 * sigma ** 2))
    return g / g.sum()


def window_size(side):
    """Largest odd window <= min(11, side)."""
    size = min(MAX_WINDOW, side)
    return size if size % 2 == 1 else size - 1


def available_scales(side, requested=len(MS_SSIM_WEIGHTS)):
    """Scales whose (floored) side stays >= 7 pixels."""
    scales = 0
    while scales < requested and side >= MIN_SCALE_SIDE:
        scales += 1
        side //= 2
    return scales


def scale_weights(scales):
    """Standard exponents for the first ``scales`` scales, renormalized to sum 1."""
    weights = torch.tensor(MS_SSIM_WEIGHTS[:scales], dtype=torch.float64)
    return weights / weights.sum()


def to_luminance(images):
    """
    N x H x W x 3 (or H x W x 3) images in [-1, 1] -> N x 1 x H x W float64
    luminance in [0, 1].
    """
    images = torch.as_tensor(np.asarray(images), dtype=torch.float64)
    if images.ndim == 3:
        images = images.unsqueeze(0)
    if images.ndim != 4 or images.shape[-1] != 3:
        raise ShapeError(f"Expected N x H x W x 3 images, got {tuple(images.shape)}")
    unit = (images + 1.0) / 2.0
    luma = (unit * torch.tensor(LUMA, dtype=torch.float64)).sum(dim=-1)
    return luma.unsqueeze(1)


def _gaussian_filter(x, win):
    """Separable valid-mode blur of N x 1 x H x W."""
    size = win.shape[0]
    out = F.conv2d(x, win.view(1, 1, 1, size))
    return F.conv2d(out, win.view(1, 1, size, 1))


def _ssim_terms(x, y):
    """Per-image mean SSIM and mean contrast-structure term at one scale."""
    win = gaussian_window(window_size(min(x.shape[-2:])))
    c1, c2 = K1 ** 2, K2 ** 2

    mu_x = _gaussian_filter(x, win)
    mu_y = _gaussian_filter(y, win)
    sigma_x = _gaussian_filter(x * x, win) - mu_x * mu_x
    sigma_y = _gaussian_filter(y * y, win) - mu_y * mu_y
    sigma_xy = _gaussian_filter(x * y, win) - mu_x * mu_y

    cs_map = (2 * sigma_xy + c2) / (sigma_x + sigma_y + c2)
    ssim_map = ((2 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)) * cs_map
    return ssim_map.flatten(1).mean(dim=1), cs_map.flatten(1).mean(dim=1)


def ms_ssim_batch(images_a, images_b, scales=len(MS_SSIM_WEIGHTS)):
    """
    MS-SSIM of N image pairs on the luminance channel.

    Returns:
        (float64 tensor of N values, number of scales used)

    Raises:
        ShapeError: shapes differ
        SizeError: image smaller than one 7-pixel scale
    """
    x, y = to_luminance(images_a), to_luminance(images_b)
    if x.shape != y.shape:
        raise ShapeError(f"MS-SSIM inputs differ in shape: {tuple(x.shape)} vs {tuple(y.shape)}")
    side = min(x.shape[-2:])
    used = available_scales(side, scales)
    if used == 0:
        raise SizeError(f"Images of side {side} are too small for MS-SSIM (need >= {MIN_SCALE_SIDE})")

    weights = scale_weights(used)
    factors = []
    for level in range(used):
        ssim, cs = _ssim_terms(x, y)
        if level < used - 1:
            factors.append(torch.relu(cs))
            x = F.avg_pool2d(x, kernel_size=2)
            y = F.avg_pool2d(y, kernel_size=2)
        else:
            factors.append(torch.relu(ssim))
    stacked = torch.stack(factors, dim=0)
    return torch.prod(stacked ** weights.view(-1, 1), dim=0), used


class IdentityExtractor:
    """Flattened raw values as features."""
    extractor_id = 'identity'

    def __call__(self, samples):
        samples = np.asarray(samples, dtype=np.float64)
        return samples.reshape(len(samples), -1)


class EncoderExtractor:
    """Features from a frozen encoder."""

    def __init__(self, encoder, ae_hash=None):
        self.encoder = encoder
        self.extractor_id = f'encoder:{ae_hash[:12]}' if ae_hash else 'encoder'

    def __call__(self, samples):
        return FeatureService.encode(self.encoder, samples)


class MetricService:
    """Service for quantitative evaluation."""

    @staticmethod
    def ms_ssim(img_a, img_b, scales=len(MS_SSIM_WEIGHTS)):
        """MS-SSIM of one pair of H x W x 3 images in [-1, 1]."""
        values, _ = ms_ssim_batch(np.asarray(img_a)[None], np.asarray(img_b)[None], scales)
        return float(values[0])

    @staticmethod
    @log_performance(threshold_ms=30000)
    def mean_pairwise_ms_ssim(samples, n_pairs, seed, n_repeats=1, config_hash=None):
        """
        Mean MS-SSIM over random distinct pairs, repeated ``n_repeats`` times.
        Lower means more diverse.

        Raises:
            StatisticsError: fewer than 2 samples
            ConfigurationError: n_pairs < 1 or n_repeats < 1
        """
        samples = np.asarray(samples)
        n = len(samples)
        if n < 2:
            raise StatisticsError(f"mean_pairwise_ms_ssim needs >= 2 samples, got {n}")
        if n_pairs < 1 or n_repeats < 1:
            raise ConfigurationError(f"n_pairs and n_repeats must be >= 1, got {n_pairs} and {n_repeats}")

        rng = numpy_rng(seed)
        values, used = [], None
        for _ in range(n_repeats):
            first = rng.integers(0, n, size=n_pairs)
            second = rng.integers(0, n - 1, size=n_pairs)
            second = second + (second >= first)
            scores = []
            for start in range(0, n_pairs, PAIR_CHUNK):
                a = samples[first[start:start + PAIR_CHUNK]]
                b = samples[second[start:start + PAIR_CHUNK]]
                chunk, used = ms_ssim_batch(a, b)
                scores.append(chunk.numpy())
            values.append(float(np.concatenate(scores).mean()))

        if used < len(MS_SSIM_WEIGHTS):
            logger.warning(f"MS-SSIM reduced to {used} scales for {samples.shape[1]}px images")
        report = MetricReport(
            metric=MetricName.MS_SSIM.value,
            values=values,
            sample_counts={'samples': n, 'pairs_per_repeat': int(n_pairs)},
            config_hash=config_hash,
            details={'scales': used, 'weights': scale_weights(used).tolist()},
        )
        logger.info(f"mean pairwise MS-SSIM: {report.mean:.4f} ± {report.std:.4f} over {n_repeats} repeats")
        return report

    # ==========================================
    # FRÉCHET DISTANCE
    # ==========================================

    @staticmethod
    def _psd_sqrt(matrix):
        eigenvalues, eigenvectors = scipy.linalg.eigh(0.5 * (matrix + matrix.T))
        cutoff = max(float(np.abs(eigenvalues).max(initial=0.0)), 0.0) * len(eigenvalues) * np.finfo(np.float64).eps
        eigenvalues = np.where(eigenvalues > cutoff, eigenvalues, 0.0)
        return (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T, eigenvalues

    @staticmethod
    def fid(stats_a, stats_b):
        """
        ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

        The trace of (S_a S_b)^(1/2) is taken from the symmetric PSD matrix
        S_a^(1/2) S_b S_a^(1/2), which has the same eigenvalues.

        Raises:
            ShapeError: dimension mismatch
            NumericError: a covariance that is not PSD, or a non-finite result
        """
        if stats_a.dim != stats_b.dim:
            raise ShapeError(f"FID needs equal dimensions, got {stats_a.dim} and {stats_b.dim}")
        for label, stats in (('a', stats_a), ('b', stats_b)):
            if not stats.is_psd():
                raise NumericError(f"FID needs PSD covariances; covariance {label} has a negative eigenvalue")

        if np.array_equal(stats_a.mean, stats_b.mean) and np.array_equal(stats_a.covariance, stats_b.covariance):
            return 0.0

        diff = stats_a.mean - stats_b.mean
        root_a, _ = MetricService._psd_sqrt(stats_a.covariance)
        _, eigenvalues = MetricService._psd_sqrt(root_a @ stats_b.covariance @ root_a)
        trace_covmean = float(np.sqrt(eigenvalues).sum())

        trace_a = float(np.trace(stats_a.covariance))
        trace_b = float(np.trace(stats_b.covariance))
        value = float(diff @ diff) + trace_a + trace_b - 2.0 * trace_covmean
        if not np.isfinite(value):
            raise NumericError("FID is not finite")
        scale = max(1.0, trace_a + trace_b)
        if value < -FID_NEGATIVE_TOLERANCE * scale:
            raise NumericError(f"FID came out negative ({value:.3e}); covariances are not PSD")
        return max(value, 0.0)

    @staticmethod
    def feature_fid(extractor, samples_a, samples_b, n_repeats=1, seed=0, config_hash=None):
        """
        FID between two sample sets in the extractor's feature space.

        With n_repeats > 1 each repeat uses a random half of each set.
        """
        n_a, n_b = len(samples_a), len(samples_b)
        if n_a < 2 or n_b < 2:
            raise StatisticsError(f"feature_fid needs >= 2 samples per side, got {n_a} and {n_b}")
        if n_repeats < 1:
            raise ConfigurationError(f"n_repeats must be >= 1, got {n_repeats}")

        features_a = as_feature_matrix(extractor(samples_a), 'features a')
        features_b = as_feature_matrix(extractor(samples_b), 'features b')

        values = []
        if n_repeats == 1:
            values.append(MetricService.fid(
                FeatureStats.from_features(features_a), FeatureStats.from_features(features_b)))
        else:
            rng = numpy_rng(seed)
            size_a, size_b = max(2, n_a // 2), max(2, n_b // 2)
            for _ in range(n_repeats):
                subset_a = features_a[rng.choice(n_a, size=size_a, replace=False)]
                subset_b = features_b[rng.choice(n_b, size=size_b, replace=False)]
                values.append(MetricService.fid(
                    FeatureStats.from_features(subset_a), FeatureStats.from_features(subset_b)))

        report = MetricReport(
            metric=MetricName.FEATURE_FID.value,
            values=values,
            sample_counts={'a': n_a, 'b': n_b},
            config_hash=config_hash,
            extractor_id=extractor.extractor_id,
            details={'feature_dim': int(features_a.shape[1])},
        )
        logger.info(f"feature FID ({extractor.extractor_id}): {report.mean:.4f} ± {report.std:.4f}")
        return report

    # ==========================================
    # COVARIANCE DISTANCE
    # ==========================================

    @staticmethod
    def covariance_distance(stats_x, stats_y, norm=CovarianceNorm.FROBENIUS.value):
        """
        ||S_x - S_y|| under the Frobenius norm or the entrywise L1 norm.
        """
        if stats_x.dim != stats_y.dim:
            raise ShapeError(f"Covariance distance needs equal dimensions, got {stats_x.dim} and {stats_y.dim}")
        delta = stats_x.covariance - stats_y.covariance
        if norm == CovarianceNorm.FROBENIUS.value:
            return float(np.linalg.norm(delta, ord='fro'))
        if norm == CovarianceNorm.L1.value:
            return float(np.abs(delta).sum())
        raise ConfigurationError(f"Unknown covariance norm: {norm}")
