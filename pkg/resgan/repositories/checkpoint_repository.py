"""Bundle checkpoint files."""
import logging
from pathlib import Path

from resgan.exceptions import IntegrityError
from resgan.utils.checksums import sha256_hex
from resgan.utils.serialization import decode_container, write_container

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'bundle_checkpoint'


class CheckpointRepository:
    """Repository for bundle checkpoints."""

    @staticmethod
    def save(path, tree):
        """
        Returns:
            The bytes written
        """
        data = write_container(path, CHECKPOINT_KIND, tree)
        logger.info(f"Saved checkpoint {path} (iteration {tree.get('iteration')}, {len(data)} bytes)")
        return data

    @staticmethod
    def load(path):
        """
        Returns:
            Tuple of (tree, checkpoint_hash)
        """
        path = Path(path)
        if not path.exists():
            raise IntegrityError(f"Checkpoint not found: {path}")
        data = path.read_bytes()
        _, version, tree = decode_container(data, expected_kind=CHECKPOINT_KIND)
        logger.debug(f"Loaded checkpoint {path} (format {version}, iteration {tree.get('iteration')})")
        return tree, sha256_hex(data)
