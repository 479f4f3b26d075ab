"""Options and helpers shared by the command modules."""
import json

import click

from resgan.enums import RunMode
from resgan.extensions import output
from resgan.services.config_service import ConfigService
from resgan.utils.seeding import enable_determinism, resolve_device

EXPERIMENT_OPTIONS = (
    click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
                 help='Experiment config (JSON).'),
    click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory.'),
    click.option('--seed', type=click.IntRange(min=0), default=None),
    click.option('--mode', type=click.Choice(RunMode.values()), default=None),
    click.option('--omega', type=click.FloatRange(min=0.0), default=None),
    click.option('--iterations', type=click.IntRange(min=0), default=None),
    click.option('--deterministic', is_flag=True, default=False, help='Force deterministic mode (otherwise the config decides).'),
    click.option('--name', default=None, help='Run name (run directory under the runs root).'),
)


def experiment_options(fn):
    """Attach the shared experiment flags to a command."""
    for option in reversed(EXPERIMENT_OPTIONS):
        fn = option(fn)
    return fn


def resolve_config(lab, config_path, **overrides):
    """Environment defaults <- config file <- flags, validated before any side effect."""
    if not overrides.get('deterministic'):
        overrides['deterministic'] = None
    defaults = {'runs_root': lab.runs_root, **lab.experiment_defaults}
    config = ConfigService.resolve(config_path, defaults=defaults, **overrides)
    if config.deterministic:
        enable_determinism()
    return config


def lab_device(lab):
    return resolve_device(lab.settings.DEVICE)


def emit(payload):
    """Command result as one JSON document on stdout."""
    output.print_json(json.dumps(payload, default=str))
