"""Image-folder persistence for domain datasets."""
import csv
import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from resgan.exceptions import DataError
from resgan.models.dataset import AttributeRecord
from resgan.utils.atomic import atomic_write_bytes, atomic_write_text

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = ('.png', '.jpg', '.jpeg')
ATTRIBUTES_FILE = 'attributes.csv'
ATTRIBUTE_COLUMNS = ('filename', 'hue', 'center_x', 'center_y', 'size', 'shape_class')


def to_uint8(images):
    """[-1, 1] floats -> uint8 (p + 1) * 127.5, rounded."""
    return np.clip(np.rint((np.asarray(images, dtype=np.float64) + 1.0) * 127.5), 0, 255).astype(np.uint8)


class DatasetRepository:
    """Repository for domain image directories."""

    @staticmethod
    def list_image_files(directory):
        """Image files directly inside ``directory``, sorted by name."""
        directory = Path(directory)
        if not directory.is_dir():
            raise DataError(f"Image directory not found: {directory}")
        return sorted(
            path for path in directory.iterdir()
            if path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS
        )

    @staticmethod
    def open_rgb(path):
        """
        Decode an image as RGB (grayscale replicated, alpha dropped).

        Returns:
            PIL image, or None if the file cannot be decoded
        """
        try:
            with Image.open(path) as image:
                return image.convert('RGB')
        except (UnidentifiedImageError, OSError) as e:
            logger.warning(f"Skipping undecodable image {path}: {e}")
            return None

    @staticmethod
    def encode_png(image):
        """H x W x C image in [-1, 1] -> PNG bytes."""
        buffer = io.BytesIO()
        Image.fromarray(to_uint8(image)).save(buffer, format='PNG')
        return buffer.getvalue()

    @staticmethod
    def write_png(path, image):
        return atomic_write_bytes(path, DatasetRepository.encode_png(image))

    @staticmethod
    def save_domain(dataset, out_dir):
        """
        Write ``<domain_id>_<index:06d>.png`` per image, plus ``attributes.csv``
        when the dataset carries attribute records.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        filenames = []
        for index, image in enumerate(dataset.images):
            filename = f'{dataset.domain_id}_{index:06d}.png'
            DatasetRepository.write_png(out_dir / filename, image)
            filenames.append(filename)

        if dataset.has_attributes:
            DatasetRepository.write_attributes(out_dir / ATTRIBUTES_FILE, filenames, dataset.attributes)

        logger.info(f"Saved domain '{dataset.domain_id}' ({len(dataset)} images) to {out_dir}")
        return out_dir

    @staticmethod
    def write_attributes(path, filenames, attributes):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(ATTRIBUTE_COLUMNS)
        for filename, record in zip(filenames, attributes):
            writer.writerow([
                filename, repr(record.hue), repr(record.center_x), repr(record.center_y),
                repr(record.size), record.shape_class,
            ])
        atomic_write_text(path, buffer.getvalue())

    @staticmethod
    def read_attributes(path):
        """filename -> AttributeRecord from an ``attributes.csv``."""
        records = {}
        with open(path, newline='') as handle:
            reader = csv.DictReader(handle)
            missing = set(ATTRIBUTE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise DataError(f"{path} is missing columns: {', '.join(sorted(missing))}")
            for row in reader:
                records[row['filename']] = AttributeRecord(
                    hue=float(row['hue']),
                    center_x=float(row['center_x']),
                    center_y=float(row['center_y']),
                    size=float(row['size']),
                    shape_class=row['shape_class'],
                )
        return records
