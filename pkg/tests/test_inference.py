"""Paired sampling, latent walks, latent recovery and evaluation reports."""
import numpy as np
import pytest
import torch

from resgan.exceptions import CapabilityError, ConfigurationError, ShapeError
from resgan.models.sample_grid import INTERPOLATION_ROWS
from resgan.repositories.grid_repository import GridRepository
from resgan.services.data_service import DataService
from resgan.services.evaluation_service import EvaluationService
from resgan.services.inference_service import InferenceService, slerp
from resgan.services.model_service import ModelService
from resgan.services.trainer_service import TrainerService
from resgan.utils.seeding import torch_generator


@pytest.fixture
def resembled_state(resembled_config, autoencoder):
    return TrainerService.init_state(
        resembled_config, autoencoder.encoder, autoencoder.stats_x, autoencoder.stats_y, autoencoder.ae_hash)


def warm_batch_norm(bundle, latent, n_batches=20):
    """Run training-mode forwards so eval-mode batch norm sees realistic statistics."""
    generator = torch_generator(7)
    bundle.train()
    with torch.no_grad():
        for _ in range(n_batches):
            z = ModelService.sample_latent(latent, 32, generator)
            bundle.gen_x(z)
            bundle.gen_y(z)
    bundle.eval()


class TestSamplePairs:

    def test_grid_layout(self, resembled_state):
        grid = InferenceService.sample_pairs(resembled_state, 8, seed=0)
        assert grid.images_x.shape == grid.images_y.shape == (8, 32, 32, 3)
        assert grid.z.shape == (8, 8)
        assert grid.shape == (2, 8)

    def test_same_seed_same_images(self, resembled_state):
        a = InferenceService.sample_pairs(resembled_state, 4, seed=1)
        b = InferenceService.sample_pairs(resembled_state, 4, seed=1)
        c = InferenceService.sample_pairs(resembled_state, 4, seed=2)
        assert np.array_equal(a.images_x, b.images_x)
        assert np.array_equal(a.images_y, b.images_y)
        assert not np.array_equal(a.z, c.z)

    def test_sampling_keeps_training_mode_intact(self, resembled_state):
        resembled_state.bundle.train()
        InferenceService.sample_pairs(resembled_state, 4, seed=0)
        assert resembled_state.bundle.gen_x.training

    def test_sidecar_latents_regenerate_the_grid(self, resembled_state, tmp_path):
        grid = InferenceService.sample_pairs(resembled_state, 6, seed=3)
        path = GridRepository.save(grid, tmp_path / 'grid.png')
        assert path.exists()
        sidecar = GridRepository.load_sidecar(path)
        assert sidecar['layout']['rows'] == 2
        assert sidecar['layout']['cols'] == 8
        replay = InferenceService.generate_from_z(resembled_state.bundle, GridRepository.load_z(path))
        assert np.array_equal(replay.images_x, grid.images_x)
        assert np.array_equal(replay.images_y, grid.images_y)

    def test_invalid_count(self, resembled_state):
        with pytest.raises(ConfigurationError):
            InferenceService.sample_pairs(resembled_state, 0, seed=0)


class TestInterpolation:

    def test_endpoints_match_direct_generation(self, resembled_state, rng):
        z0, z1 = rng.uniform(-1, 1, size=(2, 8)).astype(np.float32)
        grid = InferenceService.interpolate(resembled_state, z0, z1, steps=2)
        assert grid.layout == INTERPOLATION_ROWS
        assert grid.shape == (2, 2)
        for frame, z in enumerate((z0, z1)):
            direct = InferenceService.generate_from_z(resembled_state.bundle, z[None])
            assert np.array_equal(grid.images_x[frame], direct.images_x[0])
            assert np.array_equal(grid.images_y[frame], direct.images_y[0])
        assert np.array_equal(grid.z, np.stack([z0, z1]))

    def test_constant_walk(self, resembled_state, rng):
        z = rng.uniform(-1, 1, size=8).astype(np.float32)
        grid = InferenceService.interpolate(resembled_state, z, z, steps=5)
        for frame in range(1, 5):
            assert np.array_equal(grid.images_x[frame], grid.images_x[0])
            assert np.array_equal(grid.images_y[frame], grid.images_y[0])

    def test_spherical_walk(self, resembled_state, rng):
        z0, z1 = rng.uniform(-1, 1, size=(2, 8)).astype(np.float32)
        grid = InferenceService.interpolate(resembled_state, z0, z1, steps=7, path='spherical')
        assert len(grid) == 7
        assert np.array_equal(grid.z[0], z0)
        assert np.array_equal(grid.z[-1], z1)
        assert grid.extra['path'] == 'spherical'

    def test_slerp_keeps_unit_norm(self):
        a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        assert np.linalg.norm(slerp(a, b, 0.5)) == pytest.approx(1.0)
        np.testing.assert_allclose(slerp(a, a, 0.3), a)

    def test_too_few_steps(self, resembled_state):
        with pytest.raises(ConfigurationError):
            InferenceService.interpolate(resembled_state, np.zeros(8), np.ones(8), steps=1)

    def test_wrong_latent_dimension(self, resembled_state):
        with pytest.raises(ShapeError):
            InferenceService.interpolate(resembled_state, np.zeros(5), np.ones(8), steps=3)

    def test_unknown_path(self, resembled_state):
        with pytest.raises(ConfigurationError):
            InferenceService.interpolate(resembled_state, np.zeros(8), np.ones(8), steps=3, path='cubic')


class TestReconstruction:

    def test_mapper_recovers_latents(self, make_config, autoencoder):
        config = make_config(
            ae_checkpoint=str(autoencoder.path),
            mapper={'steps': 400, 'batch_size': 32, 'hidden': 64, 'lr': 1e-3},
        )
        state = TrainerService.init_state(
            config, autoencoder.encoder, autoencoder.stats_x, autoencoder.stats_y, autoencoder.ae_hash)
        warm_batch_norm(state.bundle, config.latent)
        held_out = InferenceService.generate_from_z(
            state.bundle, ModelService.sample_latent(config.latent, 256, torch_generator(99)))

        def held_out_error():
            z_hat = InferenceService.recover_latents(state.bundle, held_out.images_x).numpy()
            return float(np.mean((z_hat - held_out.z) ** 2))

        InferenceService.train_z_mapper(state, make_config(
            ae_checkpoint=str(autoencoder.path), mapper={'steps': 0, 'hidden': 64}))
        untrained = held_out_error()
        InferenceService.train_z_mapper(state, config)
        trained = held_out_error()
        assert trained < untrained
        # predicting the mean of U[-1, 1] scores 1/3
        assert trained < 1.0 / 3.0
        assert not state.bundle.mapper.training

    def test_reconstruct_returns_both_domains(self, resembled_state, tiny_domains):
        InferenceService.train_z_mapper(resembled_state, resembled_state.config)
        recon, resemble = InferenceService.reconstruct(resembled_state, tiny_domains[0].images[0], 'x')
        assert recon.shape == resemble.shape == (32, 32, 3)
        assert recon.min() >= -1.0 and recon.max() <= 1.0

    def test_reconstruct_without_mapper(self, resembled_state, tiny_domains):
        with pytest.raises(CapabilityError):
            InferenceService.reconstruct(resembled_state, tiny_domains[0].images[0], 'y')

    def test_reconstruct_wrong_resolution(self, resembled_state):
        InferenceService.train_z_mapper(resembled_state, resembled_state.config)
        with pytest.raises(ShapeError):
            InferenceService.reconstruct(resembled_state, np.zeros((16, 16, 3), dtype=np.float32), 'x')

    def test_mapper_needs_encoder(self, tiny_config):
        state = TrainerService.init_state(tiny_config)
        with pytest.raises(CapabilityError):
            InferenceService.train_z_mapper(state, tiny_config)


class TestEvaluation:

    def test_checkpoint_report_keys(self, resembled_state, tiny_domains):
        reports = EvaluationService.evaluate_checkpoint(
            resembled_state, real_x=tiny_domains[0], real_y=tiny_domains[1], seed=0)
        expected = {
            'ms_ssim.x', 'ms_ssim.y', 'ms_ssim.real_x', 'ms_ssim.real_y',
            'feature_fid.x', 'feature_fid.y', 'covariance_distance',
        }
        assert expected <= set(reports)
        assert reports['ms_ssim.x'].n_repeats == 2
        assert reports['feature_fid.x'].extractor_id.startswith('encoder:')
        assert reports['covariance_distance'].mean >= 0.0

    def test_cogan_checkpoint_skips_feature_metrics(self, tiny_config):
        reports = EvaluationService.evaluate_checkpoint(TrainerService.init_state(tiny_config), seed=0)
        assert 'covariance_distance' not in reports
        assert 'feature_fid.x' not in reports
        assert 'ms_ssim.x' in reports

    def test_unknown_metric(self, tiny_config):
        with pytest.raises(ConfigurationError):
            EvaluationService.evaluate_checkpoint(TrainerService.init_state(tiny_config), metrics=['inception'])

    def test_identical_directories(self, tiny_domains, tmp_path):
        DataService.save_domain(tiny_domains[0], tmp_path / 'a')
        DataService.save_domain(tiny_domains[0], tmp_path / 'b')
        reports = EvaluationService.evaluate_directories(
            tmp_path / 'a', tmp_path / 'b', 32, metrics=['feature_fid', 'ms_ssim'], n_pairs=10)
        assert reports['feature_fid'].mean == 0.0
        assert reports['ms_ssim.a'].mean == reports['ms_ssim.b'].mean

    def test_directory_covariance_needs_encoder(self, tiny_domains, tmp_path):
        DataService.save_domain(tiny_domains[0], tmp_path / 'a')
        with pytest.raises(ConfigurationError):
            EvaluationService.evaluate_directories(
                tmp_path / 'a', tmp_path / 'a', 32, metrics=['covariance_distance'])
