"""Shared fixtures: tiny experiment configs, synthetic domains and a pretrained AE."""
from dataclasses import dataclass

import numpy as np
import pytest
import torch

from config import TestingConfig
from resgan.models.features import FeatureStats
from resgan.networks.autoencoder import Encoder
from resgan.repositories.autoencoder_repository import AUTOENCODER_FILE, AutoencoderRepository
from resgan.services.config_service import ConfigService, deep_merge
from resgan.services.data_service import DataService
from resgan.services.feature_service import FeatureService

TINY_DATA = {'data': {'synthetic': {'n_per_domain': 16, 'seed': 3}}}


@dataclass
class AutoencoderArtifacts:
    path: object
    ae_hash: str
    encoder: Encoder
    stats_x: FeatureStats
    stats_y: FeatureStats


@pytest.fixture
def make_config(tmp_path):
    """Factory for validated tiny configs; keyword arguments are merged into the document."""
    def factory(**document):
        defaults = deep_merge(TestingConfig.EXPERIMENT_DEFAULTS, TINY_DATA)
        defaults = deep_merge(defaults, {'name': 'tiny', 'runs_root': str(tmp_path / 'runs')})
        return ConfigService.resolve(defaults=deep_merge(defaults, document))
    return factory


@pytest.fixture
def tiny_config(make_config):
    return make_config(mode='cogan')


@pytest.fixture
def tiny_domains(tiny_config):
    return DataService.resolve_domains(tiny_config)


@pytest.fixture
def frozen_encoder():
    torch.manual_seed(0)
    return Encoder(32, 16, 4).freeze()


@pytest.fixture
def autoencoder(tmp_path, tiny_config, tiny_domains):
    """A two-step AE saved to disk with both domains' stats next to it."""
    domain_x, domain_y = tiny_domains
    fit = FeatureService.pretrain_autoencoder(domain_x, domain_y, tiny_config)
    path = tmp_path / 'ae' / AUTOENCODER_FILE
    ae_hash = AutoencoderRepository.save(
        path, fit.encoder, fit.decoder, FeatureService.autoencoder_metadata(fit, tiny_config))
    stats = []
    for domain in (domain_x, domain_y):
        domain_stats = FeatureService.compute_domain_feature_stats(fit.encoder, domain)
        AutoencoderRepository.save_feature_stats(path, ae_hash, domain.domain_id, domain_stats)
        stats.append(domain_stats)
    return AutoencoderArtifacts(path=path, ae_hash=ae_hash, encoder=fit.encoder, stats_x=stats[0], stats_y=stats[1])


@pytest.fixture
def resembled_config(make_config, autoencoder):
    return make_config(ae_checkpoint=str(autoencoder.path))


@pytest.fixture
def rng():
    return np.random.default_rng(42)
