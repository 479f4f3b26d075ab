"""Paired sample grids."""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from resgan.exceptions import ShapeError

PAIRED_COLUMNS = 'paired_columns'
INTERPOLATION_ROWS = 'interpolation_rows'


@dataclass
class SampleGrid:
    """
    Images from both generators for the same latents.

    ``images_x[i]`` and ``images_y[i]`` come from ``z[i]``. With the
    ``paired_columns`` layout the rendered grid puts them in columns 2i and
    2i + 1; ``interpolation_rows`` renders X frames on one row and Y frames
    on the next.
    """
    images_x: np.ndarray
    images_y: np.ndarray
    z: np.ndarray
    checkpoint_hash: Optional[str] = None
    layout: str = PAIRED_COLUMNS
    pairs_per_row: int = 4
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.images_x.shape != self.images_y.shape:
            raise ShapeError(
                f"Paired images differ in shape: {self.images_x.shape} vs {self.images_y.shape}"
            )
        if len(self.z) != len(self.images_x):
            raise ShapeError(f"{len(self.z)} latents for {len(self.images_x)} image pairs")

    def __len__(self):
        return len(self.z)

    @property
    def shape(self):
        """(rows, cols) of the rendered grid."""
        n = len(self)
        if self.layout == INTERPOLATION_ROWS:
            return 2, n
        per_row = max(1, min(self.pairs_per_row, n))
        rows = -(-n // per_row)
        return rows, 2 * per_row

    def interleaved(self):
        """Images in render order (x0, y0, x1, y1, ... or all x then all y)."""
        if self.layout == INTERPOLATION_ROWS:
            return np.concatenate([self.images_x, self.images_y], axis=0)
        stacked = np.stack([self.images_x, self.images_y], axis=1)
        return stacked.reshape((-1,) + self.images_x.shape[1:])

    def layout_descriptor(self):
        rows, cols = self.shape
        return {
            'layout': self.layout,
            'rows': rows,
            'cols': cols,
            'pairs_per_row': self.pairs_per_row,
            'pairing': 'column 2i is domain x, column 2i+1 is domain y, same z'
            if self.layout == PAIRED_COLUMNS else 'row 0 is domain x, row 1 is domain y, same z per column',
        }

    def to_dict(self):
        """Sidecar contents (no pixel data)."""
        return {
            'checkpoint_hash': self.checkpoint_hash,
            'z': np.asarray(self.z, dtype=np.float64).tolist(),
            'layout': self.layout_descriptor(),
            **self.extra,
        }
