"""Synthetic attribute-labeled shape domains."""
import colorsys
import logging

import numpy as np

from resgan.enums import DatasetSource, DomainSide, Scenario, ShapeClass
from resgan.exceptions import ConfigurationError
from resgan.models.dataset import AttributeRecord, DomainDataset
from resgan.utils.seeding import numpy_rng

logger = logging.getLogger(__name__)

BACKGROUND = -1.0


def hue_to_rgb(hue):
    """Fully saturated, full-value color of ``hue`` in [0, 1]^3."""
    return np.asarray(colorsys.hsv_to_rgb(hue, 1.0, 1.0), dtype=np.float64)


def shape_mask(shape_class, center_x, center_y, size, image_size):
    """
    Boolean S x S mask of one shape.

    Coordinates are fractions of the image side measured at pixel centers;
    ``size`` is the side of the shape's bounding box.
    """
    coords = (np.arange(image_size) + 0.5) / image_size
    xx, yy = np.meshgrid(coords, coords)
    dx, dy = xx - center_x, yy - center_y
    half = size / 2.0

    if shape_class == ShapeClass.CIRCLE.value:
        return dx ** 2 + dy ** 2 <= half ** 2
    if shape_class == ShapeClass.RING.value:
        d2 = dx ** 2 + dy ** 2
        return (d2 <= half ** 2) & (d2 >= (size / 4.0) ** 2)
    if shape_class == ShapeClass.SQUARE.value:
        return np.maximum(np.abs(dx), np.abs(dy)) <= half
    if shape_class == ShapeClass.TRIANGLE.value:
        # apex up; half-width grows linearly to ``half`` at the base
        depth = dy + half
        return (depth >= 0) & (depth <= size) & (np.abs(dx) <= depth / 2.0)
    raise ConfigurationError(f"Unknown shape class: {shape_class}")


def render_image(record, image_size):
    """One H x W x 3 image in [-1, 1]: the colored shape on a black background."""
    mask = shape_mask(record.shape_class, record.center_x, record.center_y, record.size, image_size)
    image = np.full((image_size, image_size, 3), BACKGROUND, dtype=np.float32)
    image[mask] = (2.0 * hue_to_rgb(record.hue) - 1.0).astype(np.float32)
    return image


def render_images(records, image_size):
    if not records:
        return np.empty((0, image_size, image_size, 3), dtype=np.float32)
    return np.stack([render_image(record, image_size) for record in records])


def sample_attributes(n, distribution, shape_class, rng):
    """``n`` independent attribute records for one domain."""
    hue = rng.uniform(*distribution.hue_range, size=n) % 1.0
    center_x = rng.uniform(*distribution.center_range, size=n)
    center_y = rng.uniform(*distribution.center_range, size=n)
    size = rng.uniform(*distribution.size_range, size=n)
    return [
        AttributeRecord(
            hue=float(hue[i]), center_x=float(center_x[i]), center_y=float(center_y[i]),
            size=float(size[i]), shape_class=shape_class,
        )
        for i in range(n)
    ]


class SyntheticService:
    """Service for generating paired-structure synthetic domains."""

    @staticmethod
    def validate_spec(spec):
        if spec.n_per_domain < 1:
            raise ConfigurationError(f"n_per_domain must be >= 1, got {spec.n_per_domain}")
        if spec.image_size < 8:
            raise ConfigurationError(f"image_size must be >= 8, got {spec.image_size}")
        if spec.scenario is not None and not Scenario.is_valid(spec.scenario):
            raise ConfigurationError(f"Unknown scenario: {spec.scenario}")
        for shape in (spec.shape_x, spec.shape_y):
            if not ShapeClass.is_valid(shape):
                raise ConfigurationError(
                    f"Invalid shape '{shape}'. Must be one of: {', '.join(ShapeClass.values())}"
                )

        dist = spec.attribute_distribution
        bounds = {
            'hue_range': (dist.hue_range, 0.0, 1.0),
            'center_range': (dist.center_range, 0.0, 1.0),
            'size_range': (dist.size_range, 0.0, 1.0),
        }
        for name, ((low, high), floor, ceiling) in bounds.items():
            if not floor <= low <= high <= ceiling:
                raise ConfigurationError(f"{name} must satisfy {floor} <= low <= high <= {ceiling}, got ({low}, {high})")
        if dist.size_range[0] <= 0.0:
            raise ConfigurationError("size_range must be strictly positive")

    @staticmethod
    def resolve_shapes(spec):
        if spec.scenario is not None:
            return Scenario(spec.scenario).shapes
        return spec.shape_x, spec.shape_y

    @staticmethod
    def generate_synthetic_pair(spec):
        """
        Render two unpaired domains, X with shape_x and Y with shape_y.

        Attributes are drawn independently per sample and per domain from
        separate streams of ``spec.seed``.

        Returns:
            (DomainDataset, DomainDataset)

        Raises:
            ConfigurationError: invalid spec ranges
        """
        SyntheticService.validate_spec(spec)
        shapes = SyntheticService.resolve_shapes(spec)

        datasets = []
        for side, shape in zip(DomainSide, shapes):
            rng = numpy_rng(spec.seed, f'synthetic_{side.value}')
            records = sample_attributes(spec.n_per_domain, spec.attribute_distribution, shape, rng)
            datasets.append(DomainDataset(
                domain_id=side.value,
                images=render_images(records, spec.image_size),
                attributes=records,
                source=DatasetSource.SYNTHETIC.value,
            ))

        logger.info(
            f"Generated synthetic pair: {shapes[0]} vs {shapes[1]}, "
            f"{spec.n_per_domain} x {spec.image_size}px per domain, seed {spec.seed}"
        )
        return datasets[0], datasets[1]
