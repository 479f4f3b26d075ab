"""Sample grids as PNG plus a JSON sidecar."""
import io
import json
import logging
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision.utils import make_grid

from resgan.utils.atomic import atomic_write_bytes, atomic_write_json

logger = logging.getLogger(__name__)

GRID_PADDING = 2


def sidecar_path(png_path):
    return Path(png_path).with_suffix('.json')


class GridRepository:
    """Repository for rendered sample grids."""

    @staticmethod
    def compose(images, cols):
        """N x H x W x 3 images in [-1, 1] -> tiled H x W x 3 uint8 array, ``cols`` per row."""
        images = torch.as_tensor(np.ascontiguousarray(np.asarray(images).transpose(0, 3, 1, 2)))
        tiles = make_grid((images + 1.0) / 2.0, nrow=cols, padding=GRID_PADDING, pad_value=1.0)
        array = tiles.clamp(0.0, 1.0).mul(255.0).round().to(torch.uint8).permute(1, 2, 0).numpy()
        return np.ascontiguousarray(array)

    @staticmethod
    def render(grid):
        """SampleGrid -> H x W x 3 uint8 array laid out per ``grid.shape``."""
        _, cols = grid.shape
        return GridRepository.compose(grid.interleaved(), cols)

    @staticmethod
    def save(grid, png_path):
        buffer = io.BytesIO()
        Image.fromarray(GridRepository.render(grid)).save(buffer, format='PNG')
        atomic_write_bytes(png_path, buffer.getvalue())
        atomic_write_json(sidecar_path(png_path), grid.to_dict())
        logger.info(f"Saved {grid.shape[0]}x{grid.shape[1]} grid to {png_path}")
        return Path(png_path)

    @staticmethod
    def save_strip(images, png_path, metadata):
        """One row of images plus a sidecar with ``metadata``."""
        buffer = io.BytesIO()
        Image.fromarray(GridRepository.compose(images, len(images))).save(buffer, format='PNG')
        atomic_write_bytes(png_path, buffer.getvalue())
        atomic_write_json(sidecar_path(png_path), metadata)
        return Path(png_path)

    @staticmethod
    def load_sidecar(png_path):
        with open(sidecar_path(png_path)) as handle:
            return json.load(handle)

    @staticmethod
    def load_z(png_path):
        """Latents persisted next to a grid, as float32 (the dtype they were drawn in)."""
        return np.asarray(GridRepository.load_sidecar(png_path)['z'], dtype=np.float32)

