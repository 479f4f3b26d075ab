"""pretrain-ae: denoising autoencoder plus per-domain feature statistics."""
import logging
from pathlib import Path

import click

from resgan.cli.options import emit, experiment_options, lab_device, resolve_config
from resgan.repositories.autoencoder_repository import AUTOENCODER_FILE, AutoencoderRepository
from resgan.schemas import dump_experiment_config
from resgan.services.data_service import DataService
from resgan.services.feature_service import FeatureService
from resgan.utils.atomic import atomic_write_json
from resgan.utils.decorators import handle_cli_errors

logger = logging.getLogger(__name__)


@click.command('pretrain-ae')
@experiment_options
@click.pass_obj
@handle_cli_errors
def pretrain_ae(lab, config_path, out, **overrides):
    """
    Train the shared denoising autoencoder on both domains, freeze it, and
    store OUT/autoencoder.ckpt with the domain FeatureStats next to it.
    """
    config = resolve_config(lab, config_path, **overrides)
    out = Path(out or Path(config.runs_root) / config.name / 'ae')

    domain_x, domain_y = DataService.resolve_domains(config)
    fit = FeatureService.pretrain_autoencoder(domain_x, domain_y, config, device=lab_device(lab))

    ae_path = out / AUTOENCODER_FILE
    ae_hash = AutoencoderRepository.save(ae_path, fit.encoder, fit.decoder, FeatureService.autoencoder_metadata(fit, config))
    stats_files = {}
    for domain in (domain_x, domain_y):
        stats = FeatureService.compute_domain_feature_stats(fit.encoder, domain)
        stats_files[domain.domain_id] = str(AutoencoderRepository.save_feature_stats(ae_path, ae_hash, domain.domain_id, stats))
    atomic_write_json(out / 'config.json', dump_experiment_config(config))

    emit({
        'ae_checkpoint': str(ae_path),
        'ae_hash': ae_hash,
        'initial_loss': fit.initial_loss,
        'final_loss': fit.final_loss,
        'stats': stats_files,
    })
