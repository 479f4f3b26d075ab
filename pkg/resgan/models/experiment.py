"""Experiment configuration records.

These are the deserialized form of a config document; ``resgan.schemas``
validates documents and builds them. Defaults follow the DCGAN conventions
the architecture is based on.
"""
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Tuple

from resgan.enums import (
    AdversarialMode, FcMode, LatentDistribution, NoiseKind, RunMode, ShapeClass,
)


@dataclass
class LatentSpec:
    z_dim: int = 100
    distribution: str = LatentDistribution.UNIFORM.value


@dataclass
class LossVariant:
    fc_mode: str = FcMode.CENTERED_DIFFERENCE.value
    adversarial_mode: str = AdversarialMode.NON_SATURATING.value


@dataclass
class OptimizerSpec:
    kind: str = 'adam'
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999


@dataclass
class WidthConfig:
    """Base channel widths; each stride-2 stage doubles (or halves) them."""
    generator_base: int = 64
    discriminator_base: int = 64
    encoder_base: int = 32


@dataclass
class AffineParams:
    max_rotation_deg: float = 15.0
    max_translation: float = 0.1
    scale_range: Tuple[float, float] = (0.9, 1.1)


@dataclass
class NoiseSpec:
    kind: str = NoiseKind.GAUSSIAN.value
    magnitude: float = 0.1


@dataclass
class AttributeDistribution:
    hue_range: Tuple[float, float] = (0.0, 1.0)
    center_range: Tuple[float, float] = (0.3, 0.7)
    size_range: Tuple[float, float] = (0.25, 0.5)


@dataclass
class SyntheticSpec:
    n_per_domain: int = 5000
    image_size: int = 32
    shape_x: str = ShapeClass.CIRCLE.value
    shape_y: str = ShapeClass.SQUARE.value
    attribute_distribution: AttributeDistribution = field(default_factory=AttributeDistribution)
    seed: int = 0
    scenario: Optional[str] = None


@dataclass
class DomainSource:
    """Where one domain's training images come from."""
    domain_id: str
    path: Optional[str] = None
    augment_factor: int = 1


@dataclass
class DataConfig:
    x: DomainSource = field(default_factory=lambda: DomainSource(domain_id='x'))
    y: DomainSource = field(default_factory=lambda: DomainSource(domain_id='y'))
    synthetic: Optional[SyntheticSpec] = None
    affine: AffineParams = field(default_factory=AffineParams)


@dataclass
class AutoencoderConfig:
    steps: int = 2000
    batch_size: int = 64
    lr: float = 1e-3
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    holdout_fraction: float = 0.1


@dataclass
class MapperConfig:
    steps: int = 2000
    batch_size: int = 64
    lr: float = 1e-3
    hidden: int = 256


@dataclass
class EvaluationConfig:
    n_samples: int = 1000
    n_pairs: int = 10000
    n_repeats: int = 5
    fid_repeats: int = 1
    metrics: List[str] = field(default_factory=lambda: [
        'ms_ssim', 'feature_fid', 'covariance_distance', 'attribute_correlation',
    ])


@dataclass
class ExperimentConfig:
    """Every hyperparameter of one experiment."""
    name: str = 'experiment'
    mode: str = RunMode.RESEMBLED.value
    latent: LatentSpec = field(default_factory=LatentSpec)
    omega: float = 1.0
    loss_variant: LossVariant = field(default_factory=LossVariant)
    image_size: int = 32
    feature_dim: int = 64
    widths: WidthConfig = field(default_factory=WidthConfig)
    batch_size: int = 64
    iterations: int = 10000
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    d_steps_per_g_step: int = 1
    seed: int = 0
    deterministic: bool = True
    data: DataConfig = field(default_factory=DataConfig)
    ae_checkpoint: Optional[str] = None
    autoencoder: AutoencoderConfig = field(default_factory=AutoencoderConfig)
    mapper: MapperConfig = field(default_factory=MapperConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    log_every: int = 100
    checkpoint_every: int = 1000
    sample_every: int = 1000
    diagnostic_samples: int = 256
    runs_root: str = 'run'

    @property
    def uses_features(self):
        """True when feature discriminators and L_fc take part in training."""
        return self.mode in RunMode.feature_modes()

    @property
    def effective_omega(self):
        """The ablation mode forces omega to zero whatever the document says."""
        return 0.0 if self.mode == RunMode.ABLATION_OMEGA0.value else self.omega

    def to_dict(self):
        return asdict(self)
