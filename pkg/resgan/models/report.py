"""Metric report record."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from resgan.exceptions import StatisticsError


def summarize(values):
    """Mean and sample std (ddof=1, 0.0 for a single value) of per-repeat values."""
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise StatisticsError("A metric needs at least one repeat")
    std = float(array.std(ddof=1)) if array.size > 1 else 0.0
    return float(array.mean()), std


@dataclass
class MetricReport:
    """Per-repeat values of one metric plus their summary and provenance."""
    metric: str
    values: List[float]
    mean: float = 0.0
    std: float = 0.0
    sample_counts: Dict[str, int] = field(default_factory=dict)
    config_hash: Optional[str] = None
    extractor_id: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = [float(v) for v in self.values]
        self.mean, self.std = summarize(self.values)

    @classmethod
    def single(cls, metric, value, **kwargs):
        return cls(metric=metric, values=[value], **kwargs)

    @property
    def n_repeats(self):
        return len(self.values)

    def to_dict(self):
        return {
            'metric': self.metric,
            'values': list(self.values),
            'mean': self.mean,
            'std': self.std,
            'n_repeats': self.n_repeats,
            'sample_counts': dict(self.sample_counts),
            'config_hash': self.config_hash,
            'extractor_id': self.extractor_id,
            'details': dict(self.details),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            metric=data['metric'],
            values=data['values'],
            sample_counts=data.get('sample_counts', {}),
            config_hash=data.get('config_hash'),
            extractor_id=data.get('extractor_id'),
            details=data.get('details', {}),
        )
