"""Domain data records: datasets, attribute ground truth, batches, sampler state."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from resgan.enums import DatasetSource, ShapeClass
from resgan.exceptions import DataError, ShapeError

PIXEL_MIN = -1.0
PIXEL_MAX = 1.0


def check_pixel_range(images, what='images'):
    """Raise DataError if any pixel falls outside [-1, 1]."""
    if images.size == 0:
        return
    lo, hi = float(images.min()), float(images.max())
    if lo < PIXEL_MIN or hi > PIXEL_MAX or not np.isfinite(lo) or not np.isfinite(hi):
        raise DataError(f"{what} outside [-1, 1]: min={lo:.4f}, max={hi:.4f}")


@dataclass(frozen=True)
class AttributeRecord:
    """Ground-truth shareable attributes of one synthetic image."""
    hue: float
    center_x: float
    center_y: float
    size: float
    shape_class: str = ShapeClass.CIRCLE.value

    def __post_init__(self):
        if not 0.0 <= self.hue < 1.0:
            raise DataError(f"hue must be in [0, 1), got {self.hue}")
        for name in ('center_x', 'center_y'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DataError(f"{name} must be in [0, 1], got {value}")
        if not 0.0 < self.size <= 1.0:
            raise DataError(f"size must be in (0, 1], got {self.size}")
        if not ShapeClass.is_valid(self.shape_class):
            raise DataError(f"Unknown shape class: {self.shape_class}")

    def to_dict(self):
        return {
            'hue': self.hue,
            'center_x': self.center_x,
            'center_y': self.center_y,
            'size': self.size,
            'shape_class': self.shape_class,
        }


@dataclass(frozen=True)
class DomainDataset:
    """
    One domain's images (N x H x W x C, float32 in [-1, 1]).

    The image array is made read-only on construction so datasets can be
    shared between readers.
    """
    domain_id: str
    images: np.ndarray
    attributes: Optional[Tuple[AttributeRecord, ...]] = None
    source: str = DatasetSource.FOLDER.value

    def __post_init__(self):
        images = np.ascontiguousarray(self.images, dtype=np.float32)
        if images.ndim != 4:
            raise ShapeError(f"Dataset images must be N x H x W x C, got shape {images.shape}")
        check_pixel_range(images, what=f"Dataset '{self.domain_id}'")
        images.flags.writeable = False
        object.__setattr__(self, 'images', images)

        if self.attributes is not None:
            attributes = tuple(self.attributes)
            if len(attributes) != len(images):
                raise DataError(
                    f"Attribute count {len(attributes)} does not match image count {len(images)}"
                )
            object.__setattr__(self, 'attributes', attributes)

        if not DatasetSource.is_valid(self.source):
            raise DataError(f"Unknown dataset source: {self.source}")

    def __len__(self):
        return len(self.images)

    @property
    def image_shape(self):
        """(H, W, C) shared by every image."""
        return tuple(self.images.shape[1:])

    @property
    def has_attributes(self):
        return self.attributes is not None

    def to_dict(self):
        """Summary used in logs and run manifests (no pixel data)."""
        return {
            'domain_id': self.domain_id,
            'n': len(self),
            'image_shape': list(self.image_shape),
            'source': self.source,
            'has_attributes': self.has_attributes,
        }

    def __repr__(self):
        return f'<DomainDataset {self.domain_id} n={len(self)} source={self.source}>'


@dataclass(frozen=True)
class Batch:
    """A minibatch of images plus the dataset indices they came from."""
    images: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        if self.images.ndim != 4 or len(self.images) < 1:
            raise ShapeError(f"Batch must be B x H x W x C with B >= 1, got {self.images.shape}")
        if len(self.indices) != len(self.images):
            raise ShapeError("Batch indices and images differ in length")
        check_pixel_range(self.images, what='Batch')

    def __len__(self):
        return len(self.images)


@dataclass
class SamplerState:
    """
    Private random state of one batch sampler.

    Samples are drawn without replacement inside an epoch (a permutation of
    the dataset) and the permutation is redrawn when it runs out, so across
    epochs every index is drawn uniformly with replacement.
    """
    rng: np.random.Generator
    permutation: Optional[np.ndarray] = None
    cursor: int = 0
    epoch: int = 0

    @classmethod
    def from_seed(cls, seed):
        return cls(rng=np.random.default_rng(seed))

    def to_dict(self):
        return {
            'bit_generator': self.rng.bit_generator.state,
            'permutation': None if self.permutation is None else np.asarray(self.permutation, dtype=np.int64),
            'cursor': int(self.cursor),
            'epoch': int(self.epoch),
        }

    @classmethod
    def from_dict(cls, data):
        rng = np.random.default_rng()
        rng.bit_generator.state = data['bit_generator']
        permutation = data.get('permutation')
        if permutation is not None:
            permutation = np.asarray(permutation, dtype=np.int64)
        return cls(rng=rng, permutation=permutation, cursor=int(data['cursor']), epoch=int(data['epoch']))
