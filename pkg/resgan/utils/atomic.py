"""Atomic file writes (temp file in the target directory, then os.replace)."""
import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path, text):
    return atomic_write_bytes(path, text.encode('utf-8'))


def atomic_write_json(path, document):
    """Human-readable JSON with sorted keys."""
    return atomic_write_text(path, json.dumps(document, indent=2, sort_keys=True) + '\n')
