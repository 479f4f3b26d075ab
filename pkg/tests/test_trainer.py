"""Alternating training: phase isolation, frozen features, checkpoints, resume and divergence."""
import math

import numpy as np
import pytest
import torch
from torch.nn.utils import parameters_to_vector, vector_to_parameters

from resgan.exceptions import ConfigurationError, DependencyError, TrainingError
from resgan.models.losses import LOSS_FIELDS
from resgan.repositories.run_repository import RunRepository
from resgan.services.checkpoint_service import CheckpointService
from resgan.services.data_service import DataService
from resgan.services.model_service import ModelService
from resgan.services.trainer_service import TrainerService
from resgan.utils.checksums import parameter_checksum
from resgan.utils.seeding import torch_generator


@pytest.fixture
def resembled_state(resembled_config, autoencoder):
    return TrainerService.init_state(
        resembled_config, autoencoder.encoder, autoencoder.stats_x, autoencoder.stats_y, autoencoder.ae_hash)


def inputs(state, domains):
    return TrainerService.next_inputs(state, *domains)


def bundle_checksum(state):
    return parameter_checksum(*state.bundle.modules().values())


class TestPhases:

    def test_discriminator_phase_leaves_generators(self, resembled_state, tiny_domains):
        bundle = resembled_state.bundle
        gens, discs = parameter_checksum(*bundle.generators()), parameter_checksum(*bundle.discriminators())
        TrainerService.discriminator_step(resembled_state, *inputs(resembled_state, tiny_domains))
        assert parameter_checksum(*bundle.generators()) == gens
        assert parameter_checksum(*bundle.discriminators()) != discs

    def test_generator_phase_leaves_discriminators(self, resembled_state, tiny_domains):
        bundle = resembled_state.bundle
        gens, discs = parameter_checksum(*bundle.generators()), parameter_checksum(*bundle.discriminators())
        _, _, z = inputs(resembled_state, tiny_domains)
        TrainerService.generator_step(resembled_state, z)
        assert parameter_checksum(*bundle.discriminators()) == discs
        assert parameter_checksum(*bundle.generators()) != gens
        assert all(p.requires_grad for p in bundle.discriminator_parameters())

    def test_train_step_advances_and_records_losses(self, resembled_state, tiny_domains):
        TrainerService.train_step(resembled_state, *inputs(resembled_state, tiny_domains))
        assert resembled_state.iteration == 1
        losses = resembled_state.last_breakdown.to_dict()
        assert set(losses) == set(LOSS_FIELDS)
        assert all(math.isfinite(v) for v in losses.values())
        expected_total_g = (losses['g_x_adv'] + losses['g_y_adv'] + losses['g_xf_adv']
                            + losses['g_yf_adv'] + losses['omega'] * losses['fc'])
        assert losses['total_g'] == pytest.approx(expected_total_g, rel=1e-5)
        expected_total_d = losses['d_x'] + losses['d_y'] + losses['d_xf'] + losses['d_yf']
        assert losses['total_d'] == pytest.approx(expected_total_d, rel=1e-5)

    def test_encoder_frozen_over_training(self, resembled_state, tiny_domains):
        encoder = resembled_state.bundle.encoder
        before = parameter_checksum(encoder)
        for _ in range(100):
            TrainerService.train_step(resembled_state, *inputs(resembled_state, tiny_domains))
        assert parameter_checksum(encoder) == before
        assert resembled_state.iteration == 100

    def test_generator_update_is_a_descent_direction(self, resembled_config, autoencoder):
        state = TrainerService.init_state(
            resembled_config, autoencoder.encoder, autoencoder.stats_x, autoencoder.stats_y,
            autoencoder.ae_hash, dtype=torch.float64)
        z = ModelService.sample_latent(resembled_config.latent, resembled_config.batch_size, torch_generator(0))
        z = z.to(torch.float64)
        params = state.bundle.generator_parameters()
        before = parameters_to_vector(params).detach().clone()
        TrainerService.generator_step(state, z)
        direction = parameters_to_vector(params).detach() - before

        def objective(vector):
            vector_to_parameters(vector, params)
            with torch.no_grad():
                return float(TrainerService.generator_objective(
                    state.bundle, z, state.mu_x, state.mu_y, resembled_config).total_g)

        eps = 1e-3
        derivative = (objective(before + eps * direction) - objective(before - eps * direction)) / (2 * eps)
        assert derivative < 0

    def test_cogan_layers_stay_tied(self, tiny_config, tiny_domains):
        state = TrainerService.init_state(tiny_config)
        assert state.bundle.has_feature_discriminators is False
        for _ in range(100):
            TrainerService.train_step(state, *inputs(state, tiny_domains))
        bundle = state.bundle
        assert bundle.gen_x.trunk is bundle.gen_y.trunk
        assert bundle.disc_x.trunk is bundle.disc_y.trunk
        assert parameter_checksum(bundle.gen_x.trunk) == parameter_checksum(bundle.gen_y.trunk)

    def test_covariance_diagnostic(self, resembled_state, tiny_config):
        assert TrainerService.covariance_diagnostic(resembled_state) >= 0.0
        assert TrainerService.covariance_diagnostic(TrainerService.init_state(tiny_config)) is None


class TestRuns:

    def test_zero_iterations_writes_initial_checkpoint(self, make_config):
        result = TrainerService.train(make_config(mode='cogan', iterations=0))
        assert result.state.iteration == 0
        assert result.final_checkpoint.name == 'iter_0.ckpt'
        assert result.final_checkpoint.exists()
        assert RunRepository.read_metrics(result.run_dir) == []
        assert (result.run_dir / 'config.json').exists()

    def test_run_layout_and_metrics(self, resembled_config):
        result = TrainerService.train(resembled_config)
        run_dir = result.run_dir
        for k in (0, 1, 2):
            assert RunRepository.checkpoint_path(run_dir, k).exists()
        assert RunRepository.sample_path(run_dir, 2).exists()
        records = RunRepository.read_metrics(run_dir)
        assert [r['iteration'] for r in records] == [1, 2]
        for record in records:
            assert set(LOSS_FIELDS) <= set(record)
            assert record['covariance_distance'] >= 0.0
            assert 'wallclock' in record

    def test_feature_mode_needs_autoencoder(self, make_config):
        with pytest.raises(ConfigurationError):
            TrainerService.train(make_config())

    def test_same_config_same_bytes(self, resembled_config):
        first = TrainerService.train(resembled_config).final_checkpoint.read_bytes()
        second = TrainerService.train(resembled_config).final_checkpoint.read_bytes()
        assert first == second

    def test_save_load_save_is_bit_exact(self, resembled_config, tmp_path):
        result = TrainerService.train(resembled_config)
        state = CheckpointService.load_checkpoint(result.final_checkpoint)
        assert state.iteration == 2
        assert bundle_checksum(state) == bundle_checksum(result.state)
        copy = tmp_path / 'copy.ckpt'
        CheckpointService.save_checkpoint(state, copy)
        assert copy.read_bytes() == result.final_checkpoint.read_bytes()

    def test_resume_matches_uninterrupted_run(self, make_config, autoencoder):
        whole = TrainerService.train(make_config(
            name='whole', iterations=4, ae_checkpoint=str(autoencoder.path)))
        split_config = make_config(name='split', iterations=2, ae_checkpoint=str(autoencoder.path))
        head = TrainerService.train(split_config)
        resumed = TrainerService.train(
            make_config(name='split', iterations=4, ae_checkpoint=str(autoencoder.path)),
            resume_from=head.final_checkpoint,
        )
        assert resumed.state.iteration == 4
        assert bundle_checksum(resumed.state) == bundle_checksum(whole.state)

        def losses(run_dir):
            return [{k: r[k] for k in LOSS_FIELDS} for r in RunRepository.read_metrics(run_dir)]
        assert losses(resumed.run_dir) == losses(whole.run_dir)

    def test_resume_with_other_autoencoder(self, resembled_config, autoencoder, frozen_encoder):
        result = TrainerService.train(resembled_config)
        with pytest.raises(DependencyError):
            CheckpointService.load_checkpoint(result.final_checkpoint, encoder=frozen_encoder, ae_hash='0' * 64)

    def test_resume_in_another_mode(self, make_config, autoencoder):
        cogan = TrainerService.train(make_config(mode='cogan', iterations=1))
        with pytest.raises(DependencyError):
            TrainerService.train(
                make_config(iterations=2, ae_checkpoint=str(autoencoder.path)), resume_from=cogan.final_checkpoint)

    def test_divergence_saves_state_and_raises(self, resembled_config, monkeypatch):
        original = TrainerService.generator_objective

        def poisoned(bundle, z, mu_x, mu_y, config):
            breakdown = original(bundle, z, mu_x, mu_y, config)
            breakdown.total_g = breakdown.total_g * float('nan')
            return breakdown

        monkeypatch.setattr(TrainerService, 'generator_objective', staticmethod(poisoned))
        with pytest.raises(TrainingError) as excinfo:
            TrainerService.train(resembled_config)
        assert excinfo.value.snapshot['phase'] == 'generator'
        assert excinfo.value.last_finite_state is not None
        run_dir = RunRepository.run_dir(resembled_config.runs_root, resembled_config.name)
        assert RunRepository.checkpoint_path(run_dir, 0, prefix='diverged_iter').exists()

    def test_extra_discriminator_steps(self, make_config, autoencoder):
        result = TrainerService.train(make_config(d_steps_per_g_step=2, ae_checkpoint=str(autoencoder.path)))
        assert result.state.iteration == 2

    def test_missing_stats_are_computed(self, resembled_config, autoencoder, tmp_path):
        stats_dir = autoencoder.path.parent / 'stats'
        for path in stats_dir.iterdir():
            path.unlink()
        domains = DataService.resolve_domains(resembled_config)
        _, ae_hash, stats_x, _ = TrainerService.resolve_autoencoder(resembled_config, *domains, run_dir=tmp_path / 'run')
        assert ae_hash == autoencoder.ae_hash
        np.testing.assert_allclose(stats_x.mean, autoencoder.stats_x.mean, rtol=1e-6, atol=1e-9)
        assert not any(stats_dir.iterdir())
        assert len(list((tmp_path / 'run' / 'stats').iterdir())) == 2

    def test_training_leaves_the_autoencoder_directory_alone(self, resembled_config, autoencoder):
        stats_dir = autoencoder.path.parent / 'stats'
        for path in stats_dir.iterdir():
            path.unlink()
        before = sorted(p.name for p in autoencoder.path.parent.rglob('*'))
        TrainerService.train(resembled_config)
        assert sorted(p.name for p in autoencoder.path.parent.rglob('*')) == before
        run_dir = RunRepository.run_dir(resembled_config.runs_root, resembled_config.name)
        assert len(list((run_dir / 'stats').iterdir())) == 2
