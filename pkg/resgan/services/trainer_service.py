"""Alternating optimization of the discriminators and generators."""
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import torch

from resgan.exceptions import ConfigurationError, DependencyError, TrainingError
from resgan.logging_config import log_performance, set_run_context
from resgan.models.features import FeatureStats
from resgan.models.training_state import TrainingState
from resgan.networks.bundle import set_requires_grad
from resgan.repositories.autoencoder_repository import AutoencoderRepository
from resgan.repositories.grid_repository import GridRepository
from resgan.repositories.run_repository import RunRepository
from resgan.schemas import dump_experiment_config
from resgan.services.checkpoint_service import CheckpointService, build_optimizers
from resgan.services.data_service import DataService
from resgan.services.feature_service import FeatureService
from resgan.services.inference_service import InferenceService
from resgan.services.metric_service import MetricService
from resgan.services.model_service import ModelService
from resgan.services.objective_service import ObjectiveService
from resgan.utils.checksums import config_hash
from resgan.utils.seeding import torch_generator
from resgan.utils.tensors import images_to_tensor, module_device, module_dtype

logger = logging.getLogger(__name__)

GRID_PAIRS = 8


@dataclass
class TrainResult:
    run_dir: Path
    final_checkpoint: Path
    state: TrainingState


def _as_tensor(value, like):
    if value is None:
        return None
    return torch.as_tensor(value, dtype=like.dtype, device=like.device)


def _check_finite(breakdown, state, phase):
    if breakdown.is_finite():
        return
    snapshot = {'iteration': state.iteration, 'phase': phase, 'losses': breakdown.to_dict()}
    raise TrainingError(
        f"Non-finite {phase} loss at iteration {state.iteration}",
        last_finite_state={
            name: {k: v.detach().clone() for k, v in sd.items()}
            for name, sd in state.bundle.state_dict().items()
        },
        snapshot=snapshot,
    )


class TrainerService:
    """Service for training a ModelBundle."""

    @staticmethod
    def init_state(config, encoder=None, stats_x=None, stats_y=None, ae_hash=None,
                   device='cpu', dtype=torch.float32):
        """Fresh TrainingState at iteration 0."""
        bundle = ModelService.build_bundle(config, encoder)
        bundle.to(device)
        for module in bundle.modules().values():
            module.to(dtype)
        if encoder is not None:
            encoder.to(device=device, dtype=dtype)

        opt_d, opt_g = build_optimizers(bundle, config.optimizer)
        use_means = config.uses_features and stats_x is not None and stats_y is not None
        return TrainingState(
            config=config,
            bundle=bundle,
            opt_d=opt_d,
            opt_g=opt_g,
            sampler_x=DataService.new_sampler(config.seed, 'sampler_x'),
            sampler_y=DataService.new_sampler(config.seed, 'sampler_y'),
            latent_rng=torch_generator(config.seed, 'latent'),
            diag_z=CheckpointService.diagnostic_latents(config),
            mu_x=stats_x.mean.copy() if use_means else None,
            mu_y=stats_y.mean.copy() if use_means else None,
            ae_hash=ae_hash,
        )

    # ==========================================
    # PHASES
    # ==========================================

    @staticmethod
    def discriminator_step(state, batch_x, batch_y, z):
        """
        Phase 1: update D^x, D^y (and D^x_f, D^y_f) on real batches and
        fakes G(z). Fakes carry no generator gradient.
        """
        bundle, config = state.bundle, state.config
        device, dtype = module_device(bundle.gen_x), module_dtype(bundle.gen_x)
        bundle.train()
        set_requires_grad(bundle.discriminators(), True)

        real_x = images_to_tensor(batch_x.images, device=device, dtype=dtype)
        real_y = images_to_tensor(batch_y.images, device=device, dtype=dtype)
        z = z.to(device=device, dtype=dtype)
        with torch.no_grad():
            fake_x = bundle.gen_x(z)
            fake_y = bundle.gen_y(z)

        d_x = ObjectiveService.discriminator_loss(bundle.disc_x(real_x), bundle.disc_x(fake_x))
        d_y = ObjectiveService.discriminator_loss(bundle.disc_y(real_y), bundle.disc_y(fake_y))
        d_xf = d_yf = 0.0
        if bundle.has_feature_discriminators:
            encoder = bundle.encoder
            with torch.no_grad():
                feats = [encoder(t) for t in (real_x, fake_x, real_y, fake_y)]
            d_xf = ObjectiveService.discriminator_loss(bundle.fdisc_x(feats[0]), bundle.fdisc_x(feats[1]))
            d_yf = ObjectiveService.discriminator_loss(bundle.fdisc_y(feats[2]), bundle.fdisc_y(feats[3]))

        breakdown = ObjectiveService.total_discriminator_loss(d_x, d_y, d_xf, d_yf)
        breakdown.omega = config.effective_omega
        _check_finite(breakdown, state, 'discriminator')

        state.opt_d.zero_grad(set_to_none=True)
        breakdown.total_d.backward()
        state.opt_d.step()
        return breakdown.detached()

    @staticmethod
    def generator_objective(bundle, z, mu_x, mu_y, config):
        """
        Phase-2 loss: both generators through all discriminators, plus
        omega * L_fc in the feature modes.
        """
        variant = config.loss_variant
        fake_x = bundle.gen_x(z)
        fake_y = bundle.gen_y(z)
        g_x_adv = ObjectiveService.generator_adversarial_loss(bundle.disc_x(fake_x), variant)
        g_y_adv = ObjectiveService.generator_adversarial_loss(bundle.disc_y(fake_y), variant)
        if not bundle.has_feature_discriminators:
            return ObjectiveService.total_generator_loss(g_x_adv, g_y_adv, omega=0.0)

        feat_x = bundle.encoder(fake_x)
        feat_y = bundle.encoder(fake_y)
        g_xf_adv = ObjectiveService.generator_adversarial_loss(bundle.fdisc_x(feat_x), variant)
        g_yf_adv = ObjectiveService.generator_adversarial_loss(bundle.fdisc_y(feat_y), variant)
        fc = 0.0
        if mu_x is not None and mu_y is not None:
            fc = ObjectiveService.feature_covariance_loss(
                feat_x, feat_y, _as_tensor(mu_x, feat_x), _as_tensor(mu_y, feat_y), variant)
        elif config.effective_omega > 0:
            raise ConfigurationError("omega > 0 needs the domain feature means")
        return ObjectiveService.total_generator_loss(
            g_x_adv, g_y_adv, g_xf_adv, g_yf_adv, fc=fc, omega=config.effective_omega)

    @staticmethod
    def generator_step(state, z):
        """Phase 2: update G^x, G^y; discriminator parameters stay untouched."""
        bundle = state.bundle
        device, dtype = module_device(bundle.gen_x), module_dtype(bundle.gen_x)
        bundle.train()
        discriminators = bundle.discriminators()
        set_requires_grad(discriminators, False)
        try:
            breakdown = TrainerService.generator_objective(
                bundle, z.to(device=device, dtype=dtype), state.mu_x, state.mu_y, state.config)
            _check_finite(breakdown, state, 'generator')
            state.opt_g.zero_grad(set_to_none=True)
            breakdown.total_g.backward()
            state.opt_g.step()
        finally:
            set_requires_grad(discriminators, True)
        return breakdown.detached()

    @staticmethod
    def train_step(state, batch_x, batch_y, z):
        """One alternating iteration; returns the same state advanced by one."""
        d_breakdown = TrainerService.discriminator_step(state, batch_x, batch_y, z)
        g_breakdown = TrainerService.generator_step(state, z)
        state.last_breakdown = g_breakdown.merge_discriminator(d_breakdown)
        state.advance()
        return state

    @staticmethod
    def next_inputs(state, domain_x, domain_y):
        config = state.config
        batch_x = DataService.sample_batch(domain_x, config.batch_size, state.sampler_x)
        batch_y = DataService.sample_batch(domain_y, config.batch_size, state.sampler_y)
        z = ModelService.sample_latent(config.latent, config.batch_size, state.latent_rng)
        return batch_x, batch_y, z

    # ==========================================
    # DIAGNOSTICS
    # ==========================================

    @staticmethod
    def fake_feature_stats(state):
        """FeatureStats of E(G^x(diag_z)) and E(G^y(diag_z)), or None without an encoder."""
        bundle = state.bundle
        if bundle.encoder is None:
            return None
        grid = InferenceService.generate_from_z(bundle, state.diag_z)
        return (
            FeatureStats.from_features(FeatureService.encode(bundle.encoder, grid.images_x)),
            FeatureStats.from_features(FeatureService.encode(bundle.encoder, grid.images_y)),
        )

    @staticmethod
    def covariance_diagnostic(state):
        stats = TrainerService.fake_feature_stats(state)
        if stats is None:
            return None
        return MetricService.covariance_distance(*stats)

    # ==========================================
    # RUNS
    # ==========================================

    @staticmethod
    def resolve_autoencoder(config, domain_x, domain_y, run_dir=None):
        """
        Frozen encoder, AE hash and domain stats for a config.

        Stats are read from the AE directory, then from the run directory.
        Stats found in neither are computed and, given a run_dir, stored
        there; the AE directory is never written.

        Raises:
            ConfigurationError: a feature mode without an AE checkpoint
        """
        if not config.ae_checkpoint:
            if config.uses_features:
                raise ConfigurationError(f"Mode '{config.mode}' requires ae_checkpoint")
            return None, None, None, None

        encoder, _, _, ae_hash = CheckpointService.load_autoencoder(config.ae_checkpoint)
        stats = []
        for domain in (domain_x, domain_y):
            stats.append(TrainerService._domain_stats(config.ae_checkpoint, ae_hash, encoder, domain, run_dir))
        return encoder, ae_hash, stats[0], stats[1]

    @staticmethod
    def _domain_stats(ae_path, ae_hash, encoder, domain, run_dir):
        roots = [None] if run_dir is None else [None, run_dir]
        for root in roots:
            if AutoencoderRepository.stats_path(ae_path, ae_hash, domain.domain_id, root).exists():
                return AutoencoderRepository.load_feature_stats(ae_path, ae_hash, domain.domain_id, root)
        logger.warning(f"No stored feature stats for domain '{domain.domain_id}', computing them now")
        computed = FeatureService.compute_domain_feature_stats(encoder, domain)
        if run_dir is not None:
            AutoencoderRepository.save_feature_stats(ae_path, ae_hash, domain.domain_id, computed, root=run_dir)
        return computed

    @staticmethod
    def _log_step(state, run_dir, started):
        record = {
            'iteration': state.iteration,
            **state.last_breakdown.to_dict(),
            'covariance_distance': TrainerService.covariance_diagnostic(state),
            'wallclock': round(time.monotonic() - started, 3),
        }
        RunRepository.append_metrics(run_dir, record)
        logger.info(
            f"iter {state.iteration}: total_d={record['total_d']:.4f} total_g={record['total_g']:.4f} "
            f"fc={record['fc']:.4f} cov_dist={record['covariance_distance']}"
        )

    @staticmethod
    def _save_samples(state, run_dir):
        grid = InferenceService.generate_from_z(
            state.bundle, state.diag_z[:GRID_PAIRS], checkpoint_hash=None)
        GridRepository.save(grid, RunRepository.sample_path(run_dir, state.iteration))

    @staticmethod
    @log_performance(threshold_ms=600000)
    def train(config, runs_root=None, resume_from=None, device='cpu'):
        """
        Run ``config.iterations`` alternating steps.

        Writes run/<name>/{config.json, checkpoints/iter_<k>.ckpt,
        logs/metrics.jsonl, samples/iter_<k>.png}. A fresh run checkpoints
        iteration 0 before the first step. On divergence the current state
        is written to checkpoints/diverged_iter_<k>.ckpt before re-raising.

        Raises:
            ConfigurationError: feature mode without an AE checkpoint
            DependencyError: resume checkpoint built on another AE
            TrainingError: non-finite loss
        """
        run_dir = RunRepository.create(RunRepository.run_dir(runs_root or config.runs_root, config.name))
        set_run_context(run_name=config.name)
        logger.info(f"Starting {config.mode} run '{config.name}' in {run_dir}")

        domain_x, domain_y = DataService.resolve_domains(config)
        encoder, ae_hash, stats_x, stats_y = TrainerService.resolve_autoencoder(config, domain_x, domain_y, run_dir)

        if resume_from is not None:
            state = CheckpointService.load_checkpoint(resume_from, encoder=encoder, ae_hash=ae_hash, device=device)
            if state.config.mode != config.mode:
                raise DependencyError(f"Cannot resume a {state.config.mode} checkpoint as {config.mode}")
            state.config = config
            RunRepository.truncate_metrics(run_dir, state.iteration)
            logger.info(f"Resuming from {resume_from} at iteration {state.iteration}")
        else:
            state = TrainerService.init_state(config, encoder, stats_x, stats_y, ae_hash, device=device)
            RunRepository.reset_metrics(run_dir)
            CheckpointService.save_checkpoint(state, RunRepository.checkpoint_path(run_dir, 0))

        RunRepository.write_config(run_dir, dump_experiment_config(config), {
            'config_hash': config_hash(config),
            'ae_hash': ae_hash,
        })

        started = time.monotonic()
        try:
            while state.iteration < config.iterations:
                set_run_context(iteration=state.iteration + 1)
                for _ in range(config.d_steps_per_g_step - 1):
                    TrainerService.discriminator_step(state, *TrainerService.next_inputs(state, domain_x, domain_y))
                TrainerService.train_step(state, *TrainerService.next_inputs(state, domain_x, domain_y))

                k = state.iteration
                if k % config.log_every == 0 or k == config.iterations:
                    TrainerService._log_step(state, run_dir, started)
                if k % config.sample_every == 0:
                    TrainerService._save_samples(state, run_dir)
                if k % config.checkpoint_every == 0 or k == config.iterations:
                    CheckpointService.save_checkpoint(state, RunRepository.checkpoint_path(run_dir, k))
        except TrainingError as e:
            path = RunRepository.checkpoint_path(run_dir, state.iteration, prefix='diverged_iter')
            CheckpointService.save_checkpoint(state, path)
            logger.error(f"Training diverged at iteration {state.iteration}; state saved to {path}: {e}", exc_info=True)
            raise
        finally:
            set_run_context(iteration=None)

        final = RunRepository.checkpoint_path(run_dir, state.iteration)
        if not final.exists():
            CheckpointService.save_checkpoint(state, final)
        logger.info(f"Run '{config.name}' finished at iteration {state.iteration}")
        return TrainResult(run_dir=run_dir, final_checkpoint=final, state=state)

