"""Autoencoder checkpoints and the per-domain feature statistics derived from them."""
import logging
from pathlib import Path

from resgan.exceptions import DependencyError, IntegrityError
from resgan.models.features import FeatureStats
from resgan.networks.autoencoder import Decoder, Encoder
from resgan.utils.checksums import sha256_hex
from resgan.utils.serialization import decode_container, read_container, write_container

logger = logging.getLogger(__name__)

AUTOENCODER_KIND = 'autoencoder'
FEATURE_STATS_KIND = 'feature_stats'
AUTOENCODER_FILE = 'autoencoder.ckpt'
STATS_DIR = 'stats'


class AutoencoderRepository:
    """Repository for autoencoder artifacts."""

    @staticmethod
    def save(path, encoder, decoder, metadata):
        """
        Write an AE checkpoint.

        Returns:
            SHA-256 hex digest of the written file (the AE hash)
        """
        tree = {
            'encoder': encoder.state_dict(),
            'decoder': decoder.state_dict(),
            'image_size': encoder.image_size,
            'feature_dim': encoder.feature_dim,
            'encoder_base': encoder.base_width,
            **metadata,
        }
        data = write_container(path, AUTOENCODER_KIND, tree)
        ae_hash = sha256_hex(data)
        logger.info(f"Saved autoencoder checkpoint {path} (hash {ae_hash[:12]})")
        return ae_hash

    @staticmethod
    def load(path):
        """
        Read an AE checkpoint; the encoder comes back frozen.

        Returns:
            Tuple of (encoder, decoder, tree, ae_hash)
        """
        path = Path(path)
        if not path.exists():
            raise DependencyError(f"Autoencoder checkpoint not found: {path}")
        data = path.read_bytes()
        _, _, tree = decode_container(data, expected_kind=AUTOENCODER_KIND)

        encoder = Encoder(tree['image_size'], tree['feature_dim'], tree['encoder_base'])
        decoder = Decoder(tree['image_size'], tree['feature_dim'], tree['encoder_base'])
        try:
            encoder.load_state_dict(tree['encoder'])
            decoder.load_state_dict(tree['decoder'])
        except RuntimeError as e:
            raise IntegrityError(f"Autoencoder checkpoint {path} does not match its architecture: {e}") from e
        encoder.freeze()
        decoder.eval()
        return encoder, decoder, tree, sha256_hex(data)

    @staticmethod
    def stats_path(ae_path, ae_hash, domain_id, root=None):
        """Stats live under <root>/stats/; root defaults to the AE directory."""
        base = Path(root) if root is not None else Path(ae_path).parent
        return base / STATS_DIR / f'{ae_hash[:16]}_{domain_id}.stats'

    @staticmethod
    def save_feature_stats(ae_path, ae_hash, domain_id, stats, root=None):
        path = AutoencoderRepository.stats_path(ae_path, ae_hash, domain_id, root)
        write_container(path, FEATURE_STATS_KIND, {
            'ae_hash': ae_hash,
            'domain_id': domain_id,
            'mean': stats.mean,
            'covariance': stats.covariance,
            'n': stats.n,
        })
        logger.info(f"Saved feature stats for domain '{domain_id}' to {path}")
        return path

    @staticmethod
    def load_feature_stats(ae_path, ae_hash, domain_id, root=None):
        """
        Raises:
            DependencyError: stats missing or computed with another AE
        """
        path = AutoencoderRepository.stats_path(ae_path, ae_hash, domain_id, root)
        if not path.exists():
            raise DependencyError(f"No feature stats for domain '{domain_id}' under AE {ae_hash[:12]}: {path}")
        _, _, tree = read_container(path, expected_kind=FEATURE_STATS_KIND)
        if tree['ae_hash'] != ae_hash or tree['domain_id'] != domain_id:
            raise DependencyError(
                f"Feature stats {path} belong to AE {tree['ae_hash'][:12]} / domain '{tree['domain_id']}'"
            )
        return FeatureStats(mean=tree['mean'], covariance=tree['covariance'], n=tree['n'])
