"""train / train-mapper."""
import logging
from pathlib import Path

import click

from resgan.cli.options import emit, experiment_options, lab_device, resolve_config
from resgan.repositories.run_repository import RunRepository
from resgan.services.checkpoint_service import CheckpointService
from resgan.services.inference_service import InferenceService
from resgan.services.trainer_service import TrainerService
from resgan.utils.decorators import handle_cli_errors

logger = logging.getLogger(__name__)


@click.command('train')
@experiment_options
@click.option('--ae', 'ae_checkpoint', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Autoencoder checkpoint (overrides the config).')
@click.option('--resume', 'resume_from', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Checkpoint to continue from.')
@click.pass_obj
@handle_cli_errors
def train(lab, config_path, out, resume_from, **overrides):
    """Train a resembled, cogan or ablation_omega0 bundle into OUT/<name>/."""
    if out is not None:
        overrides['runs_root'] = out
    config = resolve_config(lab, config_path, **overrides)
    result = TrainerService.train(config, resume_from=resume_from, device=lab_device(lab))
    emit({
        'run_dir': str(result.run_dir),
        'final_checkpoint': str(result.final_checkpoint),
        'iteration': result.state.iteration,
        'metrics': str(RunRepository.metrics_path(result.run_dir)),
    })


@click.command('train-mapper')
@click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Output checkpoint (default: <checkpoint>_mapper.ckpt).')
@click.pass_obj
@handle_cli_errors
def train_mapper(lab, checkpoint, out):
    """Fit the feature-to-latent mapper for reconstruction and store it with the checkpoint."""
    state = CheckpointService.load_checkpoint(checkpoint, device=lab_device(lab))
    InferenceService.train_z_mapper(state, state.config)
    source = Path(checkpoint)
    out = Path(out or source.with_name(f'{source.stem}_mapper{source.suffix}'))
    CheckpointService.save_checkpoint(state, out)
    logger.info(f"Mapper checkpoint written to {out}")
    emit({'checkpoint': str(out), 'iteration': state.iteration})
