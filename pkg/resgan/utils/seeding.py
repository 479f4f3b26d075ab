"""Seed derivation and deterministic-mode setup."""
import logging
import os

import numpy as np
import torch

logger = logging.getLogger(__name__)

# Every random stream of an experiment hangs off the one config seed.
STREAMS = {
    'init': 0,
    'sampler_x': 1,
    'sampler_y': 2,
    'latent': 3,
    'diagnostic': 4,
    'augment_x': 5,
    'augment_y': 6,
    'synthetic_x': 7,
    'synthetic_y': 8,
    'autoencoder': 9,
    'mapper': 10,
    'evaluation': 11,
    'samples': 12,
    'autoencoder_batches': 13,
    'mapper_batches': 14,
}


def derive_seed(seed, stream):
    """64-bit seed of a named stream, independent across streams."""
    if stream not in STREAMS:
        raise KeyError(f"Unknown random stream: {stream}")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(STREAMS[stream],))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def numpy_rng(seed, stream=None):
    """numpy Generator for ``seed`` or for one named stream of it."""
    return np.random.default_rng(derive_seed(seed, stream) if stream else int(seed))


def torch_generator(seed, stream=None):
    """CPU torch.Generator for ``seed`` or for one named stream of it."""
    generator = torch.Generator(device='cpu')
    generator.manual_seed(derive_seed(seed, stream) if stream else int(seed))
    return generator


def enable_determinism():
    """Put torch in its reproducible mode."""
    os.environ.setdefault('CUBLAS_WORKSPACE_CONFIG', ':4096:8')
    torch.use_deterministic_algorithms(True)
    torch.backends.cudnn.deterministic = True
    torch.backends.cudnn.benchmark = False


def configure_torch(settings):
    """Apply thread count and deterministic mode from environment settings."""
    torch.set_num_threads(max(1, int(settings.NUM_THREADS)))
    if settings.DETERMINISTIC:
        enable_determinism()
    logger.debug(f'torch configured - threads: {torch.get_num_threads()}, deterministic: {settings.DETERMINISTIC}')


def resolve_device(name):
    """torch.device for a settings value, falling back to CPU when CUDA is absent."""
    if name.startswith('cuda') and not torch.cuda.is_available():
        logger.warning(f'Device {name} requested but CUDA is unavailable, using cpu')
        return torch.device('cpu')
    return torch.device(name)
