"""Marshmallow schemas for experiment config documents."""
import copy

from marshmallow import Schema, fields, validate, validates_schema, pre_load, post_load, ValidationError

from resgan.enums import (
    AdversarialMode, FcMode, LatentDistribution, MetricName, NoiseKind, RunMode, Scenario, ShapeClass,
)
from resgan.exceptions import ConfigurationError
from resgan.models.experiment import (
    AffineParams, AttributeDistribution, AutoencoderConfig, DataConfig, DomainSource,
    EvaluationConfig, ExperimentConfig, LatentSpec, LossVariant, MapperConfig, NoiseSpec,
    OptimizerSpec, SyntheticSpec, WidthConfig,
)

SUPPORTED_IMAGE_SIZES = (32, 64)
MAX_SEED = 2 ** 64 - 1


def _one_of(enum_cls, what):
    return validate.OneOf(
        enum_cls.values(),
        error=f'Invalid {what}. Must be one of: {", ".join(enum_cls.values())}'
    )


def _unit_interval_pair():
    return fields.Tuple(
        (fields.Float(validate=validate.Range(min=0.0, max=1.0)),
         fields.Float(validate=validate.Range(min=0.0, max=1.0)))
    )


def _check_ordered(data, name):
    low, high = data[name]
    if low > high:
        raise ValidationError(f'{name} lower bound {low} exceeds upper bound {high}', name)


class RecordSchema(Schema):
    """
    Base schema that builds a record dataclass after loading.

    Marshmallow returns ``load_default`` values untouched, so nested
    documents left at their default are loaded through their own schema here.
    """
    record_class = None

    def finish(self, data):
        """Hook for schema-specific adjustments before the record is built."""
        return data

    @post_load
    def make_record(self, data, **kwargs):
        for name, field in self.fields.items():
            if isinstance(field, fields.Nested) and isinstance(data.get(name), dict):
                data[name] = field.schema.load(data[name])
        return self.record_class(**self.finish(data))


# ============================================================================
# MODEL SCHEMAS
# ============================================================================

class LatentSpecSchema(RecordSchema):
    """Schema for the shared latent prior."""
    record_class = LatentSpec

    z_dim = fields.Int(load_default=100, validate=validate.Range(min=1, error='z_dim must be at least 1'))
    distribution = fields.Str(
        load_default=LatentDistribution.UNIFORM.value,
        validate=_one_of(LatentDistribution, 'latent distribution')
    )


class WidthConfigSchema(RecordSchema):
    """Schema for base channel widths."""
    record_class = WidthConfig

    generator_base = fields.Int(load_default=64, validate=validate.Range(min=1))
    discriminator_base = fields.Int(load_default=64, validate=validate.Range(min=1))
    encoder_base = fields.Int(load_default=32, validate=validate.Range(min=1))


# ============================================================================
# OBJECTIVE & OPTIMIZER SCHEMAS
# ============================================================================

class LossVariantSchema(RecordSchema):
    """Schema for the loss variant axes."""
    record_class = LossVariant

    fc_mode = fields.Str(load_default=FcMode.CENTERED_DIFFERENCE.value, validate=_one_of(FcMode, 'fc_mode'))
    adversarial_mode = fields.Str(
        load_default=AdversarialMode.NON_SATURATING.value,
        validate=_one_of(AdversarialMode, 'adversarial_mode')
    )


class OptimizerSpecSchema(RecordSchema):
    """Schema for the adaptive-moment optimizer."""
    record_class = OptimizerSpec

    kind = fields.Str(load_default='adam', validate=validate.OneOf(['adam'], error='Only adam is supported'))
    lr = fields.Float(load_default=2e-4, validate=validate.Range(min=0.0, min_inclusive=False, error='lr must be > 0'))
    beta1 = fields.Float(load_default=0.5, validate=validate.Range(min=0.0, max=1.0, max_inclusive=False))
    beta2 = fields.Float(load_default=0.999, validate=validate.Range(min=0.0, max=1.0, max_inclusive=False))


# ============================================================================
# DATA SCHEMAS
# ============================================================================

class AffineParamsSchema(RecordSchema):
    """Schema for affine augmentation ranges."""
    record_class = AffineParams

    max_rotation_deg = fields.Float(load_default=15.0, validate=validate.Range(min=0.0, max=180.0))
    max_translation = fields.Float(load_default=0.1, validate=validate.Range(min=0.0, max=0.5))
    scale_range = fields.Tuple(
        (fields.Float(validate=validate.Range(min=0.0, min_inclusive=False)),
         fields.Float(validate=validate.Range(min=0.0, min_inclusive=False))),
        load_default=(0.9, 1.1)
    )

    @validates_schema
    def validate_scale(self, data, **kwargs):
        _check_ordered(data, 'scale_range')


class AttributeDistributionSchema(RecordSchema):
    """Schema for synthetic attribute ranges."""
    record_class = AttributeDistribution

    hue_range = _unit_interval_pair()
    center_range = _unit_interval_pair()
    size_range = _unit_interval_pair()

    @validates_schema
    def validate_ranges(self, data, **kwargs):
        for name in ('hue_range', 'center_range', 'size_range'):
            if name in data:
                _check_ordered(data, name)
        if 'size_range' in data and data['size_range'][0] <= 0.0:
            raise ValidationError('size_range must start above 0', 'size_range')


class SyntheticSpecSchema(RecordSchema):
    """Schema for a synthetic domain pair."""
    record_class = SyntheticSpec

    n_per_domain = fields.Int(load_default=5000, validate=validate.Range(min=1, error='n_per_domain must be at least 1'))
    image_size = fields.Int(load_default=32, validate=validate.Range(min=8, error='image_size must be at least 8'))
    shape_x = fields.Str(load_default=ShapeClass.CIRCLE.value, validate=_one_of(ShapeClass, 'shape'))
    shape_y = fields.Str(load_default=ShapeClass.SQUARE.value, validate=_one_of(ShapeClass, 'shape'))
    attribute_distribution = fields.Nested(AttributeDistributionSchema, load_default=dict)
    seed = fields.Int(load_default=0, validate=validate.Range(min=0, max=MAX_SEED))
    scenario = fields.Str(load_default=None, allow_none=True, validate=_one_of(Scenario, 'scenario'))

    def finish(self, data):
        if data.get('scenario'):
            data['shape_x'], data['shape_y'] = Scenario(data['scenario']).shapes
        return data


class DomainSourceSchema(RecordSchema):
    """Schema for one domain's image source."""
    record_class = DomainSource

    domain_id = fields.Str(required=True, validate=validate.Length(min=1, max=64))
    path = fields.Str(load_default=None, allow_none=True)
    augment_factor = fields.Int(load_default=1, validate=validate.Range(min=1, error='augment_factor must be at least 1'))


class DataConfigSchema(RecordSchema):
    """Schema for both domains' data."""
    record_class = DataConfig

    x = fields.Nested(DomainSourceSchema, load_default=lambda: {'domain_id': 'x'})
    y = fields.Nested(DomainSourceSchema, load_default=lambda: {'domain_id': 'y'})
    synthetic = fields.Nested(SyntheticSpecSchema, load_default=None, allow_none=True)
    affine = fields.Nested(AffineParamsSchema, load_default=dict)


# ============================================================================
# AUXILIARY TRAINING SCHEMAS
# ============================================================================

class NoiseSpecSchema(RecordSchema):
    """Schema for the denoising corruption."""
    record_class = NoiseSpec

    kind = fields.Str(load_default=NoiseKind.GAUSSIAN.value, validate=_one_of(NoiseKind, 'noise kind'))
    magnitude = fields.Float(load_default=0.1, validate=validate.Range(min=0.0, error='Noise magnitude must be >= 0'))

    @validates_schema
    def validate_fraction(self, data, **kwargs):
        if data.get('kind') == NoiseKind.SALT_PEPPER.value and data.get('magnitude', 0.0) > 1.0:
            raise ValidationError('Salt-and-pepper magnitude is a fraction and must be <= 1', 'magnitude')


class AutoencoderConfigSchema(RecordSchema):
    """Schema for denoising autoencoder pretraining."""
    record_class = AutoencoderConfig

    steps = fields.Int(load_default=2000, validate=validate.Range(min=0))
    batch_size = fields.Int(load_default=64, validate=validate.Range(min=1))
    lr = fields.Float(load_default=1e-3, validate=validate.Range(min=0.0, min_inclusive=False))
    noise = fields.Nested(NoiseSpecSchema, load_default=dict)
    holdout_fraction = fields.Float(load_default=0.1, validate=validate.Range(min=0.0, max=0.5))


class MapperConfigSchema(RecordSchema):
    """Schema for the feature-to-latent mapper."""
    record_class = MapperConfig

    steps = fields.Int(load_default=2000, validate=validate.Range(min=0))
    batch_size = fields.Int(load_default=64, validate=validate.Range(min=1))
    lr = fields.Float(load_default=1e-3, validate=validate.Range(min=0.0, min_inclusive=False))
    hidden = fields.Int(load_default=256, validate=validate.Range(min=1))


class EvaluationConfigSchema(RecordSchema):
    """Schema for the evaluation protocol."""
    record_class = EvaluationConfig

    n_samples = fields.Int(load_default=1000, validate=validate.Range(min=2))
    n_pairs = fields.Int(load_default=10000, validate=validate.Range(min=1))
    n_repeats = fields.Int(load_default=5, validate=validate.Range(min=1))
    fid_repeats = fields.Int(load_default=1, validate=validate.Range(min=1))
    metrics = fields.List(
        fields.Str(validate=_one_of(MetricName, 'metric')),
        load_default=lambda: MetricName.values()
    )


# ============================================================================
# EXPERIMENT SCHEMA
# ============================================================================

class ExperimentConfigSchema(RecordSchema):
    """Schema for a complete experiment document."""
    record_class = ExperimentConfig

    name = fields.Str(
        load_default='experiment',
        validate=validate.And(
            validate.Length(min=1, max=120),
            validate.Regexp(
                r'^[a-zA-Z0-9_.-]+$',
                error='Run name can only contain letters, numbers, dots, underscores, and hyphens'
            )
        )
    )
    mode = fields.Str(load_default=RunMode.RESEMBLED.value, validate=_one_of(RunMode, 'mode'))
    latent = fields.Nested(LatentSpecSchema, load_default=dict)
    omega = fields.Float(load_default=1.0, validate=validate.Range(min=0.0, error='omega must be >= 0'))
    loss_variant = fields.Nested(LossVariantSchema, load_default=dict)
    image_size = fields.Int(
        load_default=32,
        validate=validate.OneOf(SUPPORTED_IMAGE_SIZES, error='image_size must be 32 or 64')
    )
    feature_dim = fields.Int(load_default=64, validate=validate.Range(min=1))
    widths = fields.Nested(WidthConfigSchema, load_default=dict)
    batch_size = fields.Int(load_default=64, validate=validate.Range(min=2, error='batch_size must be at least 2'))
    iterations = fields.Int(load_default=10000, validate=validate.Range(min=0))
    optimizer = fields.Nested(OptimizerSpecSchema, load_default=dict)
    d_steps_per_g_step = fields.Int(load_default=1, validate=validate.Range(min=1))
    seed = fields.Int(load_default=0, validate=validate.Range(min=0, max=MAX_SEED))
    deterministic = fields.Bool(load_default=True)
    data = fields.Nested(DataConfigSchema, load_default=dict)
    ae_checkpoint = fields.Str(load_default=None, allow_none=True)
    autoencoder = fields.Nested(AutoencoderConfigSchema, load_default=dict)
    mapper = fields.Nested(MapperConfigSchema, load_default=dict)
    evaluation = fields.Nested(EvaluationConfigSchema, load_default=dict)
    log_every = fields.Int(load_default=100, validate=validate.Range(min=1))
    checkpoint_every = fields.Int(load_default=1000, validate=validate.Range(min=1))
    sample_every = fields.Int(load_default=1000, validate=validate.Range(min=1))
    diagnostic_samples = fields.Int(load_default=256, validate=validate.Range(min=2))
    runs_root = fields.Str(load_default='run', validate=validate.Length(min=1))

    @pre_load
    def inherit_synthetic_size(self, data, **kwargs):
        """Synthetic data renders at the model resolution unless told otherwise."""
        synthetic = (data.get('data') or {}).get('synthetic') if isinstance(data, dict) else None
        if isinstance(synthetic, dict) and 'image_size' not in synthetic:
            data = copy.deepcopy(data)
            data['data']['synthetic']['image_size'] = data.get('image_size', 32)
        return data

    @validates_schema
    def validate_synthetic_size(self, data, **kwargs):
        """Synthetic data must be rendered at the model resolution."""
        synthetic = getattr(data.get('data'), 'synthetic', None)
        if synthetic is not None and synthetic.image_size != data.get('image_size', 32):
            raise ValidationError(
                f'data.synthetic.image_size ({synthetic.image_size}) must equal image_size '
                f'({data.get("image_size", 32)})'
            )


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def validate_with_errors(schema_class, data):
    """
    Validate data and return errors in a friendly format.

    Args:
        schema_class: Marshmallow schema class
        data: Data to validate

    Returns:
        Tuple of (is_valid, validated_data_or_errors)
    """
    schema = schema_class()
    try:
        validated_data = schema.load(data)
        return True, validated_data
    except ValidationError as e:
        return False, e.messages


def load_experiment_config(document):
    """Build an ExperimentConfig from a document, raising ConfigurationError on any problem."""
    is_valid, result = validate_with_errors(ExperimentConfigSchema, document)
    if not is_valid:
        raise ConfigurationError(f"Invalid experiment config: {result}")
    return result


def dump_experiment_config(config):
    """Serialize an ExperimentConfig to a JSON-ready document (tuples become lists)."""
    return _listify(ExperimentConfigSchema().dump(config))


def _listify(value):
    if isinstance(value, dict):
        return {k: _listify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_listify(v) for v in value]
    return value
