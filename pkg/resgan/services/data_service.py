"""Domain ingestion, augmentation, batching and corruption."""
import logging
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from resgan.enums import DatasetSource, NoiseKind
from resgan.exceptions import ConfigurationError, DataError
from resgan.logging_config import log_performance
from resgan.models.dataset import AttributeRecord, Batch, DomainDataset, SamplerState
from resgan.repositories.dataset_repository import ATTRIBUTES_FILE, DatasetRepository
from resgan.utils.seeding import derive_seed, numpy_rng
from resgan.utils.tensors import images_to_tensor, tensor_to_images

logger = logging.getLogger(__name__)

AUGMENT_CHUNK = 512


def center_crop_resize(image, image_size):
    """Largest centered square, resized to image_size x image_size."""
    width, height = image.size
    side = min(width, height)
    left, top = (width - side) // 2, (height - side) // 2
    square = image.crop((left, top, left + side, top + side))
    if side != image_size:
        square = square.resize((image_size, image_size), Image.Resampling.BILINEAR)
    return square


def to_unit_range(pixels):
    """uint8 pixels -> float32 in [-1, 1] via p / 127.5 - 1."""
    return (np.asarray(pixels, dtype=np.float32) / 127.5 - 1.0).astype(np.float32)


def _rotation(theta):
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([cos, -sin], -1), np.stack([sin, cos], -1)], -2)


class DataService:
    """Service for building and serving domain datasets."""

    # ==========================================
    # INGESTION
    # ==========================================

    @staticmethod
    def _read_folder(path, image_size):
        files = DatasetRepository.list_image_files(path)
        if not files:
            raise DataError(f"No images found in {path}")

        images, kept = [], []
        for file in files:
            image = DatasetRepository.open_rgb(file)
            if image is None:
                continue
            images.append(to_unit_range(center_crop_resize(image, image_size)))
            kept.append(file)

        if not images:
            raise DataError(f"All {len(files)} files in {path} failed to decode")
        if len(kept) < len(files):
            logger.warning(f"Skipped {len(files) - len(kept)} of {len(files)} files in {path}")
        return np.stack(images), kept

    @staticmethod
    @log_performance(threshold_ms=5000)
    def load_image_domain(path, image_size, domain_id=None):
        """
        Load an image folder as a domain.

        Images are center-cropped to a square, resized to ``image_size`` and
        scaled to [-1, 1]. Grayscale input is replicated to three channels.

        Raises:
            DataError: empty directory, or every file undecodable
        """
        path = Path(path)
        images, _ = DataService._read_folder(path, image_size)
        dataset = DomainDataset(domain_id=domain_id or path.name, images=images)
        logger.info(f"Loaded domain '{dataset.domain_id}': {len(dataset)} images at {image_size}px")
        return dataset

    @staticmethod
    def load_domain_directory(path, image_size, domain_id=None):
        """
        Load a folder, restoring attribute records when an ``attributes.csv``
        sits next to the images.
        """
        path = Path(path)
        attributes_file = path / ATTRIBUTES_FILE
        if not attributes_file.exists():
            return DataService.load_image_domain(path, image_size, domain_id)

        images, kept = DataService._read_folder(path, image_size)
        records = DatasetRepository.read_attributes(attributes_file)
        missing = [file.name for file in kept if file.name not in records]
        if missing:
            raise DataError(f"{attributes_file} has no rows for {len(missing)} images, e.g. {missing[0]}")

        dataset = DomainDataset(
            domain_id=domain_id or path.name,
            images=images,
            attributes=[records[file.name] for file in kept],
            source=DatasetSource.SYNTHETIC.value,
        )
        logger.info(f"Loaded synthetic domain '{dataset.domain_id}' with attributes: {len(dataset)} images")
        return dataset

    @staticmethod
    def load_image(path, image_size):
        """One image file as an image_size x image_size x 3 array in [-1, 1]."""
        image = DatasetRepository.open_rgb(path)
        if image is None:
            raise DataError(f"Cannot decode image {path}")
        return to_unit_range(center_crop_resize(image, image_size))

    @staticmethod
    def save_domain(dataset, out_dir):
        return DatasetRepository.save_domain(dataset, out_dir)

    # ==========================================
    # AUGMENTATION
    # ==========================================

    @staticmethod
    def _warp(images, matrices):
        """Resample N x H x W x C images by per-image inverse affine maps (N x 2 x 3)."""
        out = []
        for start in range(0, len(images), AUGMENT_CHUNK):
            chunk = images_to_tensor(images[start:start + AUGMENT_CHUNK])
            theta = torch.as_tensor(matrices[start:start + AUGMENT_CHUNK], dtype=torch.float32)
            grid = F.affine_grid(theta, list(chunk.shape), align_corners=False)
            warped = F.grid_sample(chunk, grid, mode='bilinear', padding_mode='border', align_corners=False)
            out.append(tensor_to_images(warped.clamp(-1.0, 1.0)))
        return np.concatenate(out)

    @staticmethod
    def _transform_attributes(records, rotation, scale, shift):
        transformed = []
        for record, rot, s, t in zip(records, rotation, scale, shift):
            center = np.array([record.center_x, record.center_y]) * 2.0 - 1.0
            moved = np.clip((s * rot @ center + t + 1.0) / 2.0, 0.0, 1.0)
            transformed.append(AttributeRecord(
                hue=record.hue,
                center_x=float(moved[0]),
                center_y=float(moved[1]),
                size=float(min(record.size * s, 1.0)),
                shape_class=record.shape_class,
            ))
        return transformed

    @staticmethod
    @log_performance(threshold_ms=5000)
    def augment_affine(dataset, factor, params, seed):
        """
        Enlarge a dataset ``factor`` times with random affine copies.

        Copy 0 is the untouched input; copies 1..factor-1 apply a random
        rotation, translation and scale drawn per image from ``params``.
        Output order is copy-major. Attribute records follow the transform.

        Raises:
            ConfigurationError: factor < 1
        """
        if factor < 1:
            raise ConfigurationError(f"Augmentation factor must be >= 1, got {factor}")
        if factor == 1:
            return dataset

        rng = numpy_rng(seed)
        n = len(dataset)
        images = [dataset.images]
        attributes = list(dataset.attributes) if dataset.has_attributes else None

        for _ in range(1, factor):
            theta = np.deg2rad(rng.uniform(-params.max_rotation_deg, params.max_rotation_deg, size=n))
            shift = 2.0 * rng.uniform(-params.max_translation, params.max_translation, size=(n, 2))
            scale = rng.uniform(*params.scale_range, size=n)

            # affine_grid maps output coordinates back to input ones
            inverse = _rotation(-theta) / scale[:, None, None]
            offset = -np.einsum('nij,nj->ni', inverse, shift)
            matrices = np.concatenate([inverse, offset[:, :, None]], axis=2)
            images.append(DataService._warp(dataset.images, matrices))

            if attributes is not None:
                attributes += DataService._transform_attributes(dataset.attributes, _rotation(theta), scale, shift)

        augmented = DomainDataset(
            domain_id=dataset.domain_id,
            images=np.concatenate(images),
            attributes=attributes,
            source=DatasetSource.AUGMENTED.value,
        )
        logger.info(f"Augmented domain '{dataset.domain_id}': {n} -> {len(augmented)} images (factor {factor})")
        return augmented

    # ==========================================
    # BATCHING
    # ==========================================

    @staticmethod
    def sample_batch(dataset, batch_size, state):
        """
        Draw the next batch and advance ``state``.

        Indices are drawn without replacement inside an epoch; a fresh
        permutation starts when the current one is used up.

        Raises:
            ConfigurationError: batch_size < 1
            DataError: empty dataset
        """
        if batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
        n = len(dataset)
        if n == 0:
            raise DataError(f"Cannot sample from empty dataset '{dataset.domain_id}'")

        indices = []
        while len(indices) < batch_size:
            if state.permutation is None or state.cursor >= len(state.permutation):
                state.permutation = state.rng.permutation(n)
                state.cursor = 0
                state.epoch += 1
            take = min(batch_size - len(indices), len(state.permutation) - state.cursor)
            indices.extend(state.permutation[state.cursor:state.cursor + take].tolist())
            state.cursor += take

        indices = np.asarray(indices, dtype=np.int64)
        return Batch(images=dataset.images[indices], indices=indices)

    @staticmethod
    def new_sampler(seed, stream=None):
        return SamplerState.from_seed(derive_seed(seed, stream) if stream else int(seed))

    # ==========================================
    # CORRUPTION
    # ==========================================

    @staticmethod
    def corrupt(batch, noise, rng):
        """
        Apply the denoising corruption to a Batch (or a bare image array).

        gaussian adds N(0, magnitude^2) per pixel and clamps; salt_pepper sets
        a ``magnitude`` fraction of pixels to -1 or +1; none is the identity.

        Raises:
            ConfigurationError: negative magnitude or unknown kind
        """
        if noise.magnitude < 0:
            raise ConfigurationError(f"Noise magnitude must be >= 0, got {noise.magnitude}")
        if not NoiseKind.is_valid(noise.kind):
            raise ConfigurationError(f"Unknown noise kind: {noise.kind}")

        images = batch.images if isinstance(batch, Batch) else batch
        if noise.kind == NoiseKind.NONE.value or noise.magnitude == 0:
            corrupted = images
        elif noise.kind == NoiseKind.GAUSSIAN.value:
            corrupted = np.clip(images + rng.normal(0.0, noise.magnitude, size=images.shape), -1.0, 1.0)
        else:
            hit = rng.random(images.shape) < noise.magnitude
            value = np.where(rng.random(images.shape) < 0.5, -1.0, 1.0)
            corrupted = np.where(hit, value, images)

        corrupted = np.asarray(corrupted, dtype=np.float32)
        if isinstance(batch, Batch):
            return Batch(images=corrupted, indices=batch.indices)
        return corrupted

    # ==========================================
    # EXPERIMENT DATA
    # ==========================================

    @staticmethod
    def resolve_domains(config):
        """
        Training domains of an experiment: synthetic when ``data.synthetic``
        is set, otherwise the two folders, each augmented by its own factor.
        """
        from resgan.services.synthetic_service import SyntheticService

        data = config.data
        if data.synthetic is not None:
            domain_x, domain_y = SyntheticService.generate_synthetic_pair(data.synthetic)
        else:
            for source in (data.x, data.y):
                if not source.path:
                    raise ConfigurationError(f"Domain '{source.domain_id}' has no path and no synthetic spec is set")
            domain_x = DataService.load_domain_directory(data.x.path, config.image_size, data.x.domain_id)
            domain_y = DataService.load_domain_directory(data.y.path, config.image_size, data.y.domain_id)

        if domain_x.image_shape != domain_y.image_shape:
            raise DataError(f"Domain image shapes differ: {domain_x.image_shape} vs {domain_y.image_shape}")

        domain_x = DataService.augment_affine(
            domain_x, data.x.augment_factor, data.affine, derive_seed(config.seed, 'augment_x'))
        domain_y = DataService.augment_affine(
            domain_y, data.y.augment_factor, data.affine, derive_seed(config.seed, 'augment_y'))
        return domain_x, domain_y
