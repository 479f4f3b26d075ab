"""Plain records shared by services, repositories and commands."""
from resgan.models.dataset import AttributeRecord, Batch, DomainDataset, SamplerState
from resgan.models.experiment import (
    AffineParams, AttributeDistribution, AutoencoderConfig, DataConfig, DomainSource,
    EvaluationConfig, ExperimentConfig, LatentSpec, LossVariant, MapperConfig, NoiseSpec,
    OptimizerSpec, SyntheticSpec, WidthConfig,
)
from resgan.models.features import FeatureStats, GaussianStats
from resgan.models.losses import LossBreakdown
from resgan.models.report import MetricReport
from resgan.models.sample_grid import SampleGrid

__all__ = [
    'AttributeRecord', 'Batch', 'DomainDataset', 'SamplerState',
    'AffineParams', 'AttributeDistribution', 'AutoencoderConfig', 'DataConfig', 'DomainSource',
    'EvaluationConfig', 'ExperimentConfig', 'LatentSpec', 'LossVariant', 'MapperConfig',
    'NoiseSpec', 'OptimizerSpec', 'SyntheticSpec', 'WidthConfig',
    'FeatureStats', 'GaussianStats', 'LossBreakdown', 'MetricReport', 'SampleGrid',
]
