"""The trainable set of one experiment."""
from dataclasses import dataclass, field
from typing import List, Optional

from torch import nn

from resgan.networks.autoencoder import Encoder
from resgan.networks.discriminator import FeatureDiscriminator, ImageDiscriminator
from resgan.networks.generator import Generator
from resgan.networks.z_mapper import ZMapper

MEMBERS = ('gen_x', 'gen_y', 'disc_x', 'disc_y', 'fdisc_x', 'fdisc_y', 'mapper')


def unique_parameters(*modules):
    """Parameters of ``modules`` with tied storage listed once."""
    seen = set()
    parameters = []
    for module in modules:
        if module is None:
            continue
        for parameter in module.parameters():
            if id(parameter) not in seen:
                seen.add(id(parameter))
                parameters.append(parameter)
    return parameters


@dataclass
class ModelBundle:
    """
    G^x, G^y, D^x, D^y, the feature discriminators D^x_f, D^y_f (absent in
    CoGAN mode), an optional ZMapper, and the frozen encoder they use.
    """
    gen_x: Generator
    gen_y: Generator
    disc_x: ImageDiscriminator
    disc_y: ImageDiscriminator
    fdisc_x: Optional[FeatureDiscriminator] = None
    fdisc_y: Optional[FeatureDiscriminator] = None
    encoder: Optional[Encoder] = None
    mapper: Optional[ZMapper] = None
    tying_manifest: List[str] = field(default_factory=list)
    iteration: int = 0

    @property
    def has_feature_discriminators(self):
        return self.fdisc_x is not None and self.fdisc_y is not None

    @property
    def is_tied(self):
        return bool(self.tying_manifest)

    def generator(self, side):
        return self.gen_x if str(getattr(side, 'value', side)) == 'x' else self.gen_y

    def generators(self):
        return [self.gen_x, self.gen_y]

    def discriminators(self):
        members = [self.disc_x, self.disc_y]
        if self.has_feature_discriminators:
            members += [self.fdisc_x, self.fdisc_y]
        return members

    def generator_parameters(self):
        return unique_parameters(*self.generators())

    def discriminator_parameters(self):
        return unique_parameters(*self.discriminators())

    def modules(self):
        """Name -> module for every present trainable member."""
        return {name: getattr(self, name) for name in MEMBERS if getattr(self, name) is not None}

    def to(self, device):
        for module in self.modules().values():
            module.to(device)
        if self.encoder is not None:
            self.encoder.to(device)
        return self

    def train(self, mode=True):
        for name, module in self.modules().items():
            module.train(mode and name != 'mapper')
        return self

    def state_dict(self):
        return {name: module.state_dict() for name, module in self.modules().items()}

    def load_state_dict(self, state):
        for name, module in self.modules().items():
            if name in state:
                module.load_state_dict(state[name])

    def members_summary(self):
        return {
            name: sum(p.numel() for p in module.parameters())
            for name, module in self.modules().items()
        }


def set_requires_grad(modules, flag):
    for module in modules:
        if isinstance(module, nn.Module):
            for parameter in module.parameters():
                parameter.requires_grad_(flag)
