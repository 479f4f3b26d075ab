"""Content hashes for configs, parameters and files."""
import hashlib
import json

import numpy as np


def canonical_json(document):
    """Deterministic JSON bytes (sorted keys, no whitespace)."""
    return json.dumps(document, sort_keys=True, separators=(',', ':'), ensure_ascii=True).encode('utf-8')


def sha256_hex(data):
    return hashlib.sha256(data).hexdigest()


def config_hash(config):
    """SHA-256 of the canonical JSON dump of an ExperimentConfig."""
    from resgan.schemas import dump_experiment_config
    return sha256_hex(canonical_json(dump_experiment_config(config)))


def file_digest(path, chunk_size=1 << 20):
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()


def parameter_checksum(*modules):
    """
    SHA-256 over parameter bytes in name order.

    Buffers (batch-norm running statistics) are excluded. Tied parameters
    are counted once per module.
    """
    digest = hashlib.sha256()
    for index, module in enumerate(modules):
        for name, parameter in sorted(module.named_parameters(), key=lambda item: item[0]):
            digest.update(f'{index}:{name}'.encode('utf-8'))
            digest.update(np.ascontiguousarray(parameter.detach().cpu().numpy()).tobytes())
    return digest.hexdigest()


def array_checksum(array):
    return sha256_hex(np.ascontiguousarray(array).tobytes())
