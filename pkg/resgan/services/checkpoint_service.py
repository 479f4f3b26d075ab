"""Training-state checkpoints and their autoencoder dependency."""
import logging

import numpy as np
import torch

from resgan.exceptions import ConfigurationError, DependencyError, IntegrityError
from resgan.models.dataset import SamplerState
from resgan.models.training_state import TrainingState
from resgan.repositories.autoencoder_repository import AutoencoderRepository
from resgan.repositories.checkpoint_repository import CheckpointRepository
from resgan.schemas import dump_experiment_config, load_experiment_config
from resgan.services.model_service import ModelService
from resgan.utils.checksums import config_hash
from resgan.utils.seeding import torch_generator

logger = logging.getLogger(__name__)


def build_optimizers(bundle, spec):
    """Adam for the discriminator set and for the generator set (tied storage counted once)."""
    if spec.kind != 'adam':
        raise ConfigurationError(f"Unsupported optimizer: {spec.kind}")
    betas = (spec.beta1, spec.beta2)
    opt_d = torch.optim.Adam(bundle.discriminator_parameters(), lr=spec.lr, betas=betas)
    opt_g = torch.optim.Adam(bundle.generator_parameters(), lr=spec.lr, betas=betas)
    return opt_d, opt_g


class CheckpointService:
    """Service turning TrainingState into checkpoint files and back."""

    @staticmethod
    def to_tree(state):
        bundle = state.bundle
        return {
            'config': dump_experiment_config(state.config),
            'config_hash': config_hash(state.config),
            'ae_hash': state.ae_hash,
            'mode': state.config.mode,
            'iteration': state.iteration,
            'tying_manifest': list(bundle.tying_manifest),
            'has_mapper': bundle.mapper is not None,
            'bundle': bundle.state_dict(),
            'optimizers': {'d': state.opt_d.state_dict(), 'g': state.opt_g.state_dict()},
            'rng': {
                'sampler_x': state.sampler_x.to_dict(),
                'sampler_y': state.sampler_y.to_dict(),
                'latent': state.latent_rng.get_state(),
            },
            'mu_x': state.mu_x,
            'mu_y': state.mu_y,
        }

    @staticmethod
    def save_checkpoint(state, path):
        """
        Returns:
            The bytes written (deterministic for a given state)
        """
        return CheckpointRepository.save(path, CheckpointService.to_tree(state))

    @staticmethod
    def load_autoencoder(path, expected_hash=None):
        """
        Raises:
            DependencyError: missing file or a hash other than ``expected_hash``
        """
        encoder, decoder, tree, ae_hash = AutoencoderRepository.load(path)
        if expected_hash is not None and ae_hash != expected_hash:
            raise DependencyError(
                f"Autoencoder {path} has hash {ae_hash[:12]}, the checkpoint needs {expected_hash[:12]}"
            )
        return encoder, decoder, tree, ae_hash

    @staticmethod
    def load_checkpoint(path, encoder=None, ae_hash=None, device='cpu'):
        """
        Rebuild a TrainingState.

        Args:
            encoder: Frozen encoder to attach; loaded from the config's
                ae_checkpoint when omitted and the checkpoint depends on one
            ae_hash: Hash of ``encoder``; must match the checkpoint's

        Raises:
            DependencyError: AE hash mismatch or AE unavailable
            IntegrityError / MigrationError: unreadable checkpoint
        """
        tree, checkpoint_hash = CheckpointRepository.load(path)
        config = load_experiment_config(tree['config'])
        required = tree.get('ae_hash')

        if required is not None:
            if encoder is None:
                if not config.ae_checkpoint:
                    raise DependencyError(f"Checkpoint {path} needs AE {required[:12]} but none is configured")
                encoder, _, _, ae_hash = CheckpointService.load_autoencoder(config.ae_checkpoint, required)
            elif ae_hash != required:
                raise DependencyError(
                    f"Checkpoint {path} was trained with AE {required[:12]}, "
                    f"got {str(ae_hash)[:12]}"
                )
        else:
            encoder, ae_hash = None, None

        bundle = ModelService.build_bundle(config, encoder)
        if tree.get('has_mapper'):
            bundle.mapper = ModelService.build_z_mapper(config.feature_dim, config.latent.z_dim, config.mapper.hidden)
        try:
            bundle.load_state_dict(tree['bundle'])
        except RuntimeError as e:
            raise IntegrityError(f"Checkpoint {path} does not match its config's architecture: {e}") from e
        bundle.iteration = int(tree['iteration'])
        bundle.to(device)

        opt_d, opt_g = build_optimizers(bundle, config.optimizer)
        opt_d.load_state_dict(tree['optimizers']['d'])
        opt_g.load_state_dict(tree['optimizers']['g'])

        latent_rng = torch.Generator(device='cpu')
        latent_rng.set_state(tree['rng']['latent'])

        state = TrainingState(
            config=config,
            bundle=bundle,
            opt_d=opt_d,
            opt_g=opt_g,
            sampler_x=SamplerState.from_dict(tree['rng']['sampler_x']),
            sampler_y=SamplerState.from_dict(tree['rng']['sampler_y']),
            latent_rng=latent_rng,
            diag_z=CheckpointService.diagnostic_latents(config),
            mu_x=None if tree['mu_x'] is None else np.asarray(tree['mu_x']),
            mu_y=None if tree['mu_y'] is None else np.asarray(tree['mu_y']),
            ae_hash=required,
            iteration=int(tree['iteration']),
            checkpoint_hash=checkpoint_hash,
        )
        logger.info(f"Restored {config.mode} state at iteration {state.iteration} from {path}")
        return state

    @staticmethod
    def diagnostic_latents(config):
        return ModelService.sample_latent(
            config.latent, config.diagnostic_samples, torch_generator(config.seed, 'diagnostic'))
