"""sample / interpolate / reconstruct."""
import logging

import click

from resgan.cli.options import emit, lab_device
from resgan.enums import DomainSide, InterpolationPath
from resgan.repositories.grid_repository import GridRepository
from resgan.services.checkpoint_service import CheckpointService
from resgan.services.data_service import DataService
from resgan.services.inference_service import InferenceService
from resgan.services.model_service import ModelService
from resgan.utils.decorators import handle_cli_errors
from resgan.utils.seeding import torch_generator

logger = logging.getLogger(__name__)

checkpoint_option = click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True)
out_option = click.option('--out', type=click.Path(dir_okay=False), required=True, help='Output PNG.')


@click.command('sample')
@checkpoint_option
@out_option
@click.option('--n', 'n', type=click.IntRange(min=1), default=8, show_default=True)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.pass_obj
@handle_cli_errors
def sample(lab, checkpoint, out, n, seed):
    """Paired samples: column 2i from G^x, column 2i+1 from G^y, same z."""
    state = CheckpointService.load_checkpoint(checkpoint, device=lab_device(lab))
    grid = InferenceService.sample_pairs(state, n, seed)
    path = GridRepository.save(grid, out)
    emit({'grid': str(path), 'pairs': len(grid), 'checkpoint_hash': state.checkpoint_hash})


@click.command('interpolate')
@checkpoint_option
@out_option
@click.option('--steps', type=int, default=8, show_default=True)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True,
              help='Seed of the two endpoint latents.')
@click.option('--path', 'path', type=click.Choice(InterpolationPath.values()),
              default=InterpolationPath.LINEAR.value, show_default=True)
@click.pass_obj
@handle_cli_errors
def interpolate(lab, checkpoint, out, steps, seed, path):
    """Latent walk between two random latents, one row per domain."""
    state = CheckpointService.load_checkpoint(checkpoint, device=lab_device(lab))
    endpoints = ModelService.sample_latent(state.config.latent, 2, torch_generator(seed, 'samples'))
    grid = InferenceService.interpolate(state, endpoints[0], endpoints[1], steps, path=path)
    saved = GridRepository.save(grid, out)
    emit({'grid': str(saved), 'steps': steps, 'path': path})


@click.command('reconstruct')
@checkpoint_option
@out_option
@click.option('--image', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--domain', type=click.Choice(DomainSide.values()), required=True,
              help='Domain the image belongs to.')
@click.pass_obj
@handle_cli_errors
def reconstruct(lab, checkpoint, out, image, domain):
    """Real image, its reconstruction, and the resemble image of the other domain."""
    state = CheckpointService.load_checkpoint(checkpoint, device=lab_device(lab))
    real = DataService.load_image(image, state.config.image_size)
    reconstruction, resemble = InferenceService.reconstruct(state, real, domain)
    saved = GridRepository.save_strip([real, reconstruction, resemble], out, {
        'checkpoint_hash': state.checkpoint_hash,
        'source_domain': domain,
        'columns': ['real', 'reconstruction', f'resemble_{DomainSide(domain).other.value}'],
    })
    emit({'grid': str(saved), 'source_domain': domain})
