"""Pixel-level attribute extraction and cross-domain attribute correlation."""
import colorsys
import logging

import numpy as np

from resgan.enums import MetricName
from resgan.exceptions import ShapeError, StatisticsError
from resgan.models.dataset import AttributeRecord
from resgan.models.report import MetricReport

logger = logging.getLogger(__name__)

FOREGROUND_THRESHOLD = 0.5
MIN_FOREGROUND_PIXELS = 4
MIN_PAIRS = 10
MAX_DROP_FRACTION = 0.5
ATTRIBUTES = ('hue', 'center_x', 'center_y', 'size', 'center')


def extract_attributes(image, shape_class='circle'):
    """
    Recover hue, center and size from one H x W x 3 image in [-1, 1].

    Foreground is every pixel whose brightest channel exceeds half
    intensity. Hue comes from the mean foreground color, center and size
    from the foreground bounding box.

    Returns:
        AttributeRecord, or None for a blank (degenerate) image
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] != image.shape[1]:
        raise ShapeError(f"Expected a square H x W x 3 image, got {image.shape}")

    side = image.shape[0]
    intensity = (image + 1.0) / 2.0
    mask = intensity.max(axis=2) > FOREGROUND_THRESHOLD
    if mask.sum() < MIN_FOREGROUND_PIXELS:
        return None

    r, g, b = np.clip(intensity[mask].mean(axis=0), 0.0, 1.0)
    hue = colorsys.rgb_to_hsv(r, g, b)[0] % 1.0

    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    center_x = (cols[0] + cols[-1] + 1) / 2.0 / side
    center_y = (rows[0] + rows[-1] + 1) / 2.0 / side
    extent = max(cols[-1] - cols[0] + 1, rows[-1] - rows[0] + 1) / side

    return AttributeRecord(
        hue=float(hue),
        center_x=float(np.clip(center_x, 0.0, 1.0)),
        center_y=float(np.clip(center_y, 0.0, 1.0)),
        size=float(min(extent, 1.0)),
        shape_class=shape_class,
    )


def pearson(a, b):
    """Pearson correlation of two equal-length samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"pearson needs two equal-length vectors, got {a.shape} and {b.shape}")
    if len(a) < 2:
        raise StatisticsError("pearson needs at least 2 samples")
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt((da ** 2).sum() * (db ** 2).sum())
    if denom == 0:
        raise StatisticsError("pearson undefined for a constant sample")
    return float((da * db).sum() / denom)


def circular_mean(angles):
    return float(np.arctan2(np.sin(angles).sum(), np.cos(angles).sum()))


def circular_correlation(a, b, period=1.0):
    """
    Circular correlation coefficient of two angular samples.

    Values are given in units of ``period`` (hue uses period 1).
    """
    a = 2.0 * np.pi * np.asarray(a, dtype=np.float64) / period
    b = 2.0 * np.pi * np.asarray(b, dtype=np.float64) / period
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"circular_correlation needs two equal-length vectors, got {a.shape} and {b.shape}")
    if len(a) < 2:
        raise StatisticsError("circular_correlation needs at least 2 samples")
    sa = np.sin(a - circular_mean(a))
    sb = np.sin(b - circular_mean(b))
    denom = np.sqrt((sa ** 2).sum() * (sb ** 2).sum())
    if denom == 0:
        raise StatisticsError("circular correlation undefined for a constant sample")
    return float((sa * sb).sum() / denom)


def correlate_attributes(records_x, records_y):
    """
    Per-attribute correlation between paired records.

    ``center`` is the mean of the center_x and center_y correlations.
    """
    if len(records_x) != len(records_y):
        raise ShapeError(f"Paired record lists differ in length: {len(records_x)} vs {len(records_y)}")

    def column(records, name):
        return np.array([getattr(record, name) for record in records])

    result = {
        'hue': circular_correlation(column(records_x, 'hue'), column(records_y, 'hue')),
    }
    for name in ('center_x', 'center_y', 'size'):
        result[name] = pearson(column(records_x, name), column(records_y, name))
    result['center'] = (result['center_x'] + result['center_y']) / 2.0
    return result


class AttributeService:
    """Service quantifying shared attributes across paired generations."""

    @staticmethod
    def extract_pairs(images_x, images_y):
        """Extract both sides; pairs where either side is blank are dropped."""
        if len(images_x) != len(images_y):
            raise ShapeError(f"Paired image sets differ in length: {len(images_x)} vs {len(images_y)}")

        kept_x, kept_y = [], []
        for image_x, image_y in zip(images_x, images_y):
            record_x = extract_attributes(image_x)
            record_y = extract_attributes(image_y)
            if record_x is None or record_y is None:
                continue
            kept_x.append(record_x)
            kept_y.append(record_y)
        return kept_x, kept_y

    @staticmethod
    def attribute_correlation(images_x, images_y, config_hash=None):
        """
        Correlation of hue, center and size between pairs generated from the
        same latent.

        Returns:
            dict attribute name -> MetricReport

        Raises:
            StatisticsError: fewer than 10 pairs, or more than half dropped
        """
        n_pairs = len(images_x)
        if n_pairs < MIN_PAIRS:
            raise StatisticsError(f"attribute_correlation needs >= {MIN_PAIRS} pairs, got {n_pairs}")

        records_x, records_y = AttributeService.extract_pairs(images_x, images_y)
        dropped = n_pairs - len(records_x)
        if dropped:
            logger.warning(f"attribute_correlation dropped {dropped}/{n_pairs} degenerate pairs")
        if dropped > MAX_DROP_FRACTION * n_pairs:
            raise StatisticsError(f"Too many degenerate pairs: {dropped} of {n_pairs} dropped")

        try:
            correlations = correlate_attributes(records_x, records_y)
        except StatisticsError as e:
            logger.error(f"attribute_correlation failed: {e}", exc_info=True)
            raise

        counts = {'pairs': n_pairs, 'kept': len(records_x), 'dropped': dropped}
        reports = {
            name: MetricReport.single(
                metric=f'{MetricName.ATTRIBUTE_CORRELATION.value}.{name}',
                value=value,
                sample_counts=counts,
                config_hash=config_hash,
                extractor_id='pixel_attributes',
            )
            for name, value in correlations.items()
        }
        logger.info(
            'attribute_correlation: ' + ', '.join(f'{name}={value:.4f}' for name, value in correlations.items())
        )
        return reports
