"""Coupled-domain GAN lab: Resembled GAN, the CoGAN baseline, and their evaluation."""
import logging
import os
from dataclasses import dataclass

from config import config_by_name
from resgan.exceptions import ConfigurationError
from resgan.logging_config import setup_logging
from resgan.utils.seeding import configure_torch

logger = logging.getLogger(__name__)


@dataclass
class Lab:
    """Resolved environment settings for one process."""
    env: str
    settings: type

    @property
    def runs_root(self):
        return self.settings.RUNS_ROOT

    @property
    def experiment_defaults(self):
        return self.settings.EXPERIMENT_DEFAULTS


def create_lab(config_name=None, log_level=None):
    """Lab factory: pick settings, configure logging and torch."""
    if config_name is None:
        config_name = os.getenv('RESGAN_ENV', 'development')
    if config_name not in config_by_name:
        raise ConfigurationError(
            f"Unknown environment '{config_name}'. Must be one of: {', '.join(config_by_name)}"
        )

    settings = config_by_name[config_name]
    setup_logging(settings, log_level=log_level)
    configure_torch(settings)

    logger.info(f'Lab started - environment: {config_name}, device: {settings.DEVICE}')
    return Lab(env=config_name, settings=settings)
