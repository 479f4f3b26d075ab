"""Experiment config resolution: file, environment defaults, command-line overrides."""
import copy
import json
import logging
from pathlib import Path

from resgan.exceptions import ConfigurationError
from resgan.schemas import load_experiment_config

logger = logging.getLogger(__name__)

# Command-line flag -> document path
OVERRIDE_PATHS = {
    'name': ('name',),
    'seed': ('seed',),
    'mode': ('mode',),
    'omega': ('omega',),
    'iterations': ('iterations',),
    'deterministic': ('deterministic',),
    'ae_checkpoint': ('ae_checkpoint',),
    'runs_root': ('runs_root',),
}


def deep_merge(base, update):
    """Recursive dict merge; ``update`` wins, nested dicts are merged."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class ConfigService:
    """Service for building validated ExperimentConfigs."""

    @staticmethod
    def read_document(path):
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            with open(path) as handle:
                document = json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(document, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")
        return document

    @staticmethod
    def apply_overrides(document, **overrides):
        """Set the non-None command-line overrides in a document."""
        document = copy.deepcopy(document)
        for flag, value in overrides.items():
            if value is None:
                continue
            if flag not in OVERRIDE_PATHS:
                raise ConfigurationError(f"Unknown override: {flag}")
            *parents, leaf = OVERRIDE_PATHS[flag]
            target = document
            for key in parents:
                target = target.setdefault(key, {})
            target[leaf] = value
        return document

    @staticmethod
    def resolve(path=None, defaults=None, **overrides):
        """
        Environment defaults <- config file <- overrides, then validation.

        Raises:
            ConfigurationError: unreadable file or invalid document
        """
        document = deep_merge(defaults or {}, ConfigService.read_document(path) if path else {})
        document = ConfigService.apply_overrides(document, **overrides)
        config = load_experiment_config(document)
        logger.debug(f"Resolved config '{config.name}' ({config.mode}) from {path or 'defaults'}")
        return config
