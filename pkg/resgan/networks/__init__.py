"""torch network definitions."""
from resgan.networks.autoencoder import Autoencoder, Decoder, Encoder
from resgan.networks.bundle import ModelBundle, unique_parameters
from resgan.networks.cogan import CoGANPair
from resgan.networks.discriminator import FeatureDiscriminator, ImageDiscriminator
from resgan.networks.generator import Generator
from resgan.networks.z_mapper import ZMapper

__all__ = [
    'Autoencoder', 'Decoder', 'Encoder', 'ModelBundle', 'unique_parameters', 'CoGANPair',
    'FeatureDiscriminator', 'ImageDiscriminator', 'Generator', 'ZMapper',
]
