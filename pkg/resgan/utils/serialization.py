"""
Binary artifact container.

Layout::

    MAGIC (8 bytes) | header length (u32, little endian) | header (canonical JSON)
    | array payload | SHA-256 of everything before it (32 bytes)

The header holds the format version, the artifact kind, a JSON tree where
arrays are replaced by ``{"__array__": index}`` references, and one entry
per array (dtype, shape, offset, whether it was a torch tensor). Dicts with
non-string keys (optimizer state) are stored as ``{"__dict_items__": [...]}``.
The same tree always produces the same bytes.
"""
import hashlib
import json
import logging
import struct

import numpy as np
import torch
from packaging.version import InvalidVersion, Version

from resgan.exceptions import IntegrityError, MigrationError
from resgan.utils.atomic import atomic_write_bytes
from resgan.utils.checksums import canonical_json

logger = logging.getLogger(__name__)

MAGIC = b'RSGANCKP'
FORMAT_VERSION = '1.0'
DIGEST_SIZE = 32
_LENGTH = struct.Struct('<I')

ARRAY_TAG = '__array__'
DICT_ITEMS_TAG = '__dict_items__'

# from_version -> (to_version, function(header) -> header)
MIGRATIONS = {}


class _Encoder:

    def __init__(self):
        self.arrays = []
        self.entries = []
        self.offset = 0

    def add_array(self, array, is_torch):
        array = np.ascontiguousarray(array)
        index = len(self.arrays)
        self.arrays.append(array.tobytes())
        self.entries.append({
            'dtype': array.dtype.str,
            'shape': list(array.shape),
            'offset': self.offset,
            'nbytes': int(array.nbytes),
            'torch': is_torch,
        })
        self.offset += int(array.nbytes)
        return {ARRAY_TAG: index}

    def encode(self, value):
        if isinstance(value, torch.Tensor):
            return self.add_array(value.detach().cpu().contiguous().numpy(), True)
        if isinstance(value, np.ndarray):
            return self.add_array(value, False)
        if isinstance(value, np.generic):
            return value.item()
        if isinstance(value, dict):
            if all(isinstance(key, str) for key in value):
                return {key: self.encode(value[key]) for key in sorted(value)}
            items = value.items()
            if all(isinstance(key, int) for key in value):
                items = sorted(items, key=lambda item: item[0])
            return {DICT_ITEMS_TAG: [[self.encode(k), self.encode(v)] for k, v in items]}
        if isinstance(value, (list, tuple)):
            return [self.encode(item) for item in value]
        if value is None or isinstance(value, (bool, int, float, str)):
            return value
        raise TypeError(f"Cannot serialize value of type {type(value).__name__}")


def _decode(value, arrays):
    if isinstance(value, dict):
        if set(value) == {ARRAY_TAG}:
            return arrays[value[ARRAY_TAG]]
        if set(value) == {DICT_ITEMS_TAG}:
            return {_hashable(_decode(k, arrays)): _decode(v, arrays) for k, v in value[DICT_ITEMS_TAG]}
        return {key: _decode(item, arrays) for key, item in value.items()}
    if isinstance(value, list):
        return [_decode(item, arrays) for item in value]
    return value


def _hashable(key):
    return tuple(key) if isinstance(key, list) else key


def encode_container(kind, tree):
    """Serialize ``tree`` into container bytes."""
    encoder = _Encoder()
    encoded = encoder.encode(tree)
    header = canonical_json({
        'format_version': FORMAT_VERSION,
        'kind': kind,
        'tree': encoded,
        'arrays': encoder.entries,
    })
    body = MAGIC + _LENGTH.pack(len(header)) + header + b''.join(encoder.arrays)
    return body + hashlib.sha256(body).digest()


def _migrate(header):
    try:
        version = Version(str(header.get('format_version')))
    except InvalidVersion as e:
        raise MigrationError(f"Unreadable container version: {header.get('format_version')!r}") from e

    current = Version(FORMAT_VERSION)
    if version > current:
        raise MigrationError(f"Container version {version} is newer than supported {current}")
    while version < current:
        step = MIGRATIONS.get(str(version))
        if step is None:
            raise MigrationError(f"No migration from container version {version} to {current}")
        target, migrate = step
        logger.info(f"Migrating container from version {version} to {target}")
        header = migrate(header)
        version = Version(target)
    return header


def decode_container(data, expected_kind=None):
    """
    Parse container bytes.

    Returns:
        Tuple of (kind, format_version, tree)

    Raises:
        IntegrityError: Truncated, corrupted, or not a container
        MigrationError: Unsupported format version
    """
    minimum = len(MAGIC) + _LENGTH.size + DIGEST_SIZE
    if len(data) < minimum:
        raise IntegrityError(f"Container truncated ({len(data)} bytes)")
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise IntegrityError("Container checksum mismatch (file corrupted)")
    if not body.startswith(MAGIC):
        raise IntegrityError("Not a resgan container (bad magic)")

    (header_length,) = _LENGTH.unpack_from(body, len(MAGIC))
    header_start = len(MAGIC) + _LENGTH.size
    payload_start = header_start + header_length
    try:
        header = json.loads(body[header_start:payload_start].decode('utf-8'))
    except ValueError as e:
        raise IntegrityError(f"Container header unreadable: {e}") from e

    stored_version = header.get('format_version')
    header = _migrate(header)
    kind = header.get('kind')
    if expected_kind is not None and kind != expected_kind:
        raise IntegrityError(f"Expected a '{expected_kind}' container, found '{kind}'")

    payload = body[payload_start:]
    arrays = []
    for entry in header['arrays']:
        start, end = entry['offset'], entry['offset'] + entry['nbytes']
        if end > len(payload):
            raise IntegrityError("Container payload shorter than its manifest")
        array = np.frombuffer(payload[start:end], dtype=np.dtype(entry['dtype'])).reshape(entry['shape']).copy()
        arrays.append(torch.from_numpy(array) if entry['torch'] else array)

    return kind, stored_version, _decode(header['tree'], arrays)


def write_container(path, kind, tree):
    data = encode_container(kind, tree)
    atomic_write_bytes(path, data)
    return data


def read_container(path, expected_kind=None):
    with open(path, 'rb') as handle:
        data = handle.read()
    return decode_container(data, expected_kind=expected_kind)
