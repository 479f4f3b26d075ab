"""evaluate: metric reports for a checkpoint or two image directories."""
import logging
from pathlib import Path

import click

from resgan.cli.options import emit, lab_device
from resgan.enums import MetricName
from resgan.exceptions import ConfigurationError
from resgan.repositories.report_repository import ReportRepository
from resgan.services.checkpoint_service import CheckpointService
from resgan.services.data_service import DataService
from resgan.services.evaluation_service import EvaluationService
from resgan.utils.checksums import config_hash
from resgan.utils.decorators import handle_cli_errors

logger = logging.getLogger(__name__)


@click.command('evaluate')
@click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--dir-a', type=click.Path(exists=True, file_okay=False), default=None)
@click.option('--dir-b', type=click.Path(exists=True, file_okay=False), default=None)
@click.option('--metric', 'metrics', type=click.Choice(MetricName.values()), multiple=True,
              help='Repeatable; defaults to the config list (checkpoint) or feature_fid (directories).')
@click.option('--image-size', type=click.Choice(['32', '64']), default='32', show_default=True)
@click.option('--ae', 'ae_checkpoint', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Encoder for directory comparisons (raw pixels otherwise).')
@click.option('--real/--no-real', default=True, show_default=True,
              help='Score a checkpoint against its training domains.')
@click.option('--seed', type=click.IntRange(min=0), default=None)
@click.option('--out', type=click.Path(dir_okay=False), required=True, help='Report file (JSON).')
@click.pass_obj
@handle_cli_errors
def evaluate(lab, checkpoint, dir_a, dir_b, metrics, image_size, ae_checkpoint, real, seed, out):
    """Write a report of MetricReports keyed by metric (and domain)."""
    if (checkpoint is None) == (dir_a is None or dir_b is None):
        raise ConfigurationError("Give either --checkpoint or both --dir-a and --dir-b")

    if checkpoint is not None:
        state = CheckpointService.load_checkpoint(checkpoint, device=lab_device(lab))
        real_x = real_y = None
        if real:
            real_x, real_y = DataService.resolve_domains(state.config)
        reports = EvaluationService.evaluate_checkpoint(state, list(metrics) or None, real_x, real_y, seed)
        provenance = {
            'checkpoint': str(checkpoint),
            'checkpoint_hash': state.checkpoint_hash,
            'config_hash': config_hash(state.config),
            'ae_hash': state.ae_hash,
            'iteration': state.iteration,
        }
    else:
        encoder = ae_hash = None
        if ae_checkpoint:
            encoder, _, _, ae_hash = CheckpointService.load_autoencoder(ae_checkpoint)
        reports = EvaluationService.evaluate_directories(
            dir_a, dir_b, int(image_size), list(metrics) or None, encoder, ae_hash,
            seed=0 if seed is None else seed,
        )
        provenance = {
            'dir_a': str(dir_a),
            'dir_b': str(dir_b),
            'ae_hash': ae_hash,
        }

    path = ReportRepository.save(Path(out), reports, provenance)
    emit({'report': str(path), 'metrics': {name: report.mean for name, report in sorted(reports.items())}})
