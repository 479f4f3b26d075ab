"""CoGAN weight-tied generator and discriminator pairs."""
from dataclasses import dataclass, field
from typing import List

from resgan.networks.discriminator import ImageDiscriminator
from resgan.networks.generator import Generator


@dataclass
class CoGANPair:
    """
    Two generators sharing every layer but the last, and two discriminators
    sharing every layer but the first. Shared layers are the same module
    objects, batch-norm running statistics included.
    """
    gen_x: Generator
    gen_y: Generator
    disc_x: ImageDiscriminator
    disc_y: ImageDiscriminator
    manifest: List[str] = field(default_factory=list)

    @classmethod
    def build(cls, z_dim, image_size, widths):
        gen_x = Generator(z_dim, image_size, widths.generator_base, domain_id='x')
        gen_y = Generator(z_dim, image_size, widths.generator_base, domain_id='y', trunk=gen_x.trunk)
        disc_x = ImageDiscriminator(image_size, widths.discriminator_base, domain_id='x')
        disc_y = ImageDiscriminator(image_size, widths.discriminator_base, domain_id='y', trunk=disc_x.trunk)
        return cls(gen_x, gen_y, disc_x, disc_y, manifest=tying_manifest(gen_x, disc_x))

    def is_tied(self):
        """True while the shared layers are still one storage."""
        return self.gen_x.trunk is self.gen_y.trunk and self.disc_x.trunk is self.disc_y.trunk


def tying_manifest(generator, discriminator):
    """Parameter ids shared between domains."""
    names = [f'gen.trunk.{name}' for name, _ in generator.trunk.named_parameters()]
    names += [f'disc.trunk.{name}' for name, _ in discriminator.trunk.named_parameters()]
    return names
