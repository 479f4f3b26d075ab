"""Network construction and latent sampling."""
import logging

import torch

from resgan.enums import LatentDistribution, RunMode
from resgan.exceptions import ConfigurationError
from resgan.networks.bundle import ModelBundle
from resgan.networks.cogan import CoGANPair
from resgan.networks.discriminator import FeatureDiscriminator, ImageDiscriminator
from resgan.networks.generator import Generator
from resgan.networks.init import weights_init
from resgan.networks.z_mapper import ZMapper
from resgan.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

SUPPORTED_IMAGE_SIZES = (32, 64)


def _check_image_size(image_size):
    if image_size not in SUPPORTED_IMAGE_SIZES:
        raise ConfigurationError(
            f"Unsupported image size {image_size}. Must be one of: {', '.join(map(str, SUPPORTED_IMAGE_SIZES))}"
        )


def _check_dim(name, value):
    if value < 1:
        raise ConfigurationError(f"{name} must be >= 1, got {value}")


class ModelService:
    """Service for building networks."""

    @staticmethod
    def build_generator(latent, image_size, widths, domain_id='x'):
        """DCGAN generator G: z -> S x S x 3 in (-1, 1)."""
        _check_image_size(image_size)
        _check_dim('z_dim', latent.z_dim)
        return Generator(latent.z_dim, image_size, widths.generator_base, domain_id=domain_id)

    @staticmethod
    def build_image_discriminator(image_size, widths, domain_id='x'):
        _check_image_size(image_size)
        return ImageDiscriminator(image_size, widths.discriminator_base, domain_id=domain_id)

    @staticmethod
    def build_feature_discriminator(feature_dim, domain_id='x'):
        _check_dim('feature_dim', feature_dim)
        return FeatureDiscriminator(feature_dim, domain_id=domain_id)

    @staticmethod
    def build_cogan_pair(latent, image_size, widths):
        """Generators tied except their last layer, discriminators tied except their first."""
        _check_image_size(image_size)
        _check_dim('z_dim', latent.z_dim)
        pair = CoGANPair.build(latent.z_dim, image_size, widths)
        logger.debug(f"Built CoGAN pair with {len(pair.manifest)} tied parameters")
        return pair

    @staticmethod
    def build_z_mapper(feature_dim, z_dim, hidden=256):
        _check_dim('feature_dim', feature_dim)
        _check_dim('z_dim', z_dim)
        _check_dim('hidden', hidden)
        return ZMapper(feature_dim, z_dim, hidden=hidden)

    @staticmethod
    def build_bundle(config, encoder=None):
        """
        Every network of one experiment, DCGAN-initialized from the ``init``
        stream of the config seed.

        cogan mode ties the pair and has no feature discriminators; the
        other modes build four independent discriminators and need the
        frozen encoder.
        """
        if config.uses_features:
            if encoder is None:
                raise ConfigurationError(f"Mode '{config.mode}' needs a pretrained autoencoder")
            if encoder.feature_dim != config.feature_dim or encoder.image_size != config.image_size:
                raise ConfigurationError(
                    f"Encoder ({encoder.image_size}px, d={encoder.feature_dim}) does not match config "
                    f"({config.image_size}px, d={config.feature_dim})"
                )

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(config.seed, 'init'))
            if config.mode == RunMode.COGAN.value:
                pair = ModelService.build_cogan_pair(config.latent, config.image_size, config.widths)
                bundle = ModelBundle(
                    gen_x=pair.gen_x, gen_y=pair.gen_y, disc_x=pair.disc_x, disc_y=pair.disc_y,
                    encoder=encoder, tying_manifest=list(pair.manifest),
                )
            else:
                bundle = ModelBundle(
                    gen_x=ModelService.build_generator(config.latent, config.image_size, config.widths, 'x'),
                    gen_y=ModelService.build_generator(config.latent, config.image_size, config.widths, 'y'),
                    disc_x=ModelService.build_image_discriminator(config.image_size, config.widths, 'x'),
                    disc_y=ModelService.build_image_discriminator(config.image_size, config.widths, 'y'),
                    fdisc_x=ModelService.build_feature_discriminator(config.feature_dim, 'x'),
                    fdisc_y=ModelService.build_feature_discriminator(config.feature_dim, 'y'),
                    encoder=encoder,
                )
            for module in bundle.modules().values():
                module.apply(weights_init)

        logger.info(f"Built {config.mode} bundle: {bundle.members_summary()}")
        return bundle

    @staticmethod
    def sample_latent(latent, n, generator):
        """
        n x z_dim latents from P_z.

        Args:
            latent: LatentSpec
            generator: torch.Generator owning the stream
        """
        if latent.distribution == LatentDistribution.UNIFORM.value:
            return torch.rand(n, latent.z_dim, generator=generator) * 2.0 - 1.0
        if latent.distribution == LatentDistribution.STANDARD_NORMAL.value:
            return torch.randn(n, latent.z_dim, generator=generator)
        raise ConfigurationError(f"Unknown latent distribution: {latent.distribution}")
