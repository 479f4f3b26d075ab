"""Experiment config documents: validation, defaults and layered resolution."""
import json

import pytest

from resgan.enums import FcMode, RunMode, ShapeClass
from resgan.exceptions import ConfigurationError
from resgan.schemas import (
    ExperimentConfigSchema, dump_experiment_config, load_experiment_config, validate_with_errors,
)
from resgan.services.config_service import ConfigService, deep_merge


class TestExperimentDefaults:

    def test_empty_document_loads_defaults(self):
        config = load_experiment_config({})
        assert config.mode == RunMode.RESEMBLED.value
        assert config.omega == 1.0
        assert config.loss_variant.fc_mode == FcMode.CENTERED_DIFFERENCE.value
        assert config.loss_variant.adversarial_mode == 'non_saturating'
        assert config.latent.distribution == 'uniform'
        assert config.optimizer.lr == pytest.approx(2e-4)
        assert config.optimizer.beta1 == pytest.approx(0.5)

    def test_ablation_forces_zero_omega(self):
        config = load_experiment_config({'mode': 'ablation_omega0', 'omega': 1.0})
        assert config.omega == 1.0
        assert config.effective_omega == 0.0
        assert config.uses_features

    def test_cogan_does_not_use_features(self):
        assert not load_experiment_config({'mode': 'cogan'}).uses_features

    def test_dump_then_load_preserves_config(self):
        config = load_experiment_config({
            'name': 'round-trip',
            'omega': 0.5,
            'data': {'synthetic': {'n_per_domain': 10, 'scenario': 'high_similarity'}},
            'evaluation': {'metrics': ['ms_ssim']},
        })
        document = dump_experiment_config(config)
        json.dumps(document)
        assert load_experiment_config(document).to_dict() == config.to_dict()


class TestValidation:

    @pytest.mark.parametrize('document', [
        {'mode': 'bogus'},
        {'omega': -0.1},
        {'image_size': 48},
        {'batch_size': 1},
        {'iterations': -1},
        {'name': 'has spaces'},
        {'latent': {'z_dim': 0}},
        {'loss_variant': {'fc_mode': 'sum'}},
        {'autoencoder': {'noise': {'kind': 'salt_pepper', 'magnitude': 1.5}}},
        {'data': {'affine': {'scale_range': [1.2, 0.8]}}},
        {'evaluation': {'metrics': ['inception_score']}},
    ])
    def test_invalid_documents_raise_configuration_error(self, document):
        with pytest.raises(ConfigurationError):
            load_experiment_config(document)

    def test_validate_with_errors_reports_field(self):
        is_valid, errors = validate_with_errors(ExperimentConfigSchema, {'omega': -1})
        assert not is_valid
        assert 'omega' in errors

    def test_iterations_zero_is_valid(self):
        assert load_experiment_config({'iterations': 0}).iterations == 0


class TestSyntheticSpec:

    def test_synthetic_inherits_model_resolution(self):
        config = load_experiment_config({'image_size': 64, 'data': {'synthetic': {}}})
        assert config.data.synthetic.image_size == 64

    def test_synthetic_resolution_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            load_experiment_config({'image_size': 64, 'data': {'synthetic': {'image_size': 32}}})

    def test_scenario_sets_shapes(self):
        config = load_experiment_config({'data': {'synthetic': {'scenario': 'high_similarity'}}})
        assert config.data.synthetic.shape_x == ShapeClass.CIRCLE.value
        assert config.data.synthetic.shape_y == ShapeClass.RING.value

    def test_reversed_range_rejected(self):
        with pytest.raises(ConfigurationError):
            load_experiment_config({'data': {'synthetic': {'attribute_distribution': {'size_range': [0.5, 0.2]}}}})


class TestConfigService:

    def test_deep_merge_is_recursive_and_pure(self):
        base = {'a': {'b': 1, 'c': 2}, 'd': 3}
        merged = deep_merge(base, {'a': {'b': 10}})
        assert merged == {'a': {'b': 10, 'c': 2}, 'd': 3}
        assert base == {'a': {'b': 1, 'c': 2}, 'd': 3}

    def test_layers_defaults_file_and_overrides(self, tmp_path):
        path = tmp_path / 'experiment.json'
        path.write_text(json.dumps({'name': 'from-file', 'seed': 5, 'omega': 2.0}))
        config = ConfigService.resolve(
            path, defaults={'seed': 1, 'iterations': 7, 'omega': 3.0}, omega=0.25, seed=None)
        assert config.name == 'from-file'
        assert config.iterations == 7
        assert config.seed == 5
        assert config.omega == 0.25

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigurationError):
            ConfigService.apply_overrides({}, learning_rate=1.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ConfigService.resolve(tmp_path / 'nope.json')

    def test_bad_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"name": ')
        with pytest.raises(ConfigurationError):
            ConfigService.resolve(path)

    def test_non_object_document(self, tmp_path):
        path = tmp_path / 'list.json'
        path.write_text('[1, 2]')
        with pytest.raises(ConfigurationError):
            ConfigService.read_document(path)

    def test_shipped_configs_validate(self):
        from pathlib import Path
        root = Path(__file__).resolve().parent.parent / 'configs'
        for path in sorted(root.glob('*.json')):
            ConfigService.resolve(path)
