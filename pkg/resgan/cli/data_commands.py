"""make-data: synthetic or folder domains, augmented, written as PNG directories."""
import logging
from pathlib import Path

import click

from resgan.cli.options import emit, experiment_options, resolve_config
from resgan.schemas import dump_experiment_config
from resgan.services.data_service import DataService
from resgan.utils.atomic import atomic_write_json
from resgan.utils.checksums import config_hash
from resgan.utils.decorators import handle_cli_errors

logger = logging.getLogger(__name__)


@click.command('make-data')
@experiment_options
@click.pass_obj
@handle_cli_errors
def make_data(lab, config_path, out, **overrides):
    """
    Build both training domains and save them under OUT/x and OUT/y.

    Synthetic domains carry an attributes.csv; affine augmentation factors
    from the config are applied before writing.
    """
    config = resolve_config(lab, config_path, **overrides)
    out = Path(out or Path(config.runs_root) / config.name / 'data')

    domain_x, domain_y = DataService.resolve_domains(config)
    dir_x = DataService.save_domain(domain_x, out / 'x')
    dir_y = DataService.save_domain(domain_y, out / 'y')
    atomic_write_json(out / 'config.json', dump_experiment_config(config))

    logger.info(f"make-data wrote {len(domain_x)} + {len(domain_y)} images to {out}")
    emit({
        'x': {'path': str(dir_x), 'images': len(domain_x)},
        'y': {'path': str(dir_y), 'images': len(domain_y)},
        'config_hash': config_hash(config),
    })
