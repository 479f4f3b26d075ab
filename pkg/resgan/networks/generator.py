"""DCGAN generator."""
import torch
from torch import nn

from resgan.networks.init import ladder_depth

IMAGE_CHANNELS = 3


class Generator(nn.Module):
    """
    Maps z (B x z_dim) to images (B x 3 x S x S) in (-1, 1).

    ``trunk`` is the project-and-reshape stem plus every hidden transposed
    conv stage; ``head`` is the last transposed conv and tanh. The CoGAN
    pair shares the trunk between domains.
    """

    def __init__(self, z_dim, image_size, base_width, domain_id='x', trunk=None):
        super().__init__()
        self.z_dim = z_dim
        self.image_size = image_size
        self.domain_id = domain_id

        depth = ladder_depth(image_size)
        widths = [base_width * 2 ** (depth - 1 - i) for i in range(depth)]
        self.trunk = trunk if trunk is not None else self._build_trunk(z_dim, widths)
        self.head = nn.Sequential(
            nn.ConvTranspose2d(widths[-1], IMAGE_CHANNELS, 4, 2, 1, bias=False),
            nn.Tanh(),
        )

    @staticmethod
    def _build_trunk(z_dim, widths):
        layers = [
            nn.Linear(z_dim, widths[0] * 4 * 4, bias=False),
            nn.Unflatten(1, (widths[0], 4, 4)),
            nn.BatchNorm2d(widths[0]),
            nn.ReLU(True),
        ]
        for in_ch, out_ch in zip(widths[:-1], widths[1:]):
            layers += [
                nn.ConvTranspose2d(in_ch, out_ch, 4, 2, 1, bias=False),
                nn.BatchNorm2d(out_ch),
                nn.ReLU(True),
            ]
        return nn.Sequential(*layers)

    @property
    def output_shape(self):
        return IMAGE_CHANNELS, self.image_size, self.image_size

    def forward(self, z):
        return self.head(self.trunk(z))

    @torch.no_grad()
    def generate(self, z):
        """Inference-mode forward pass (batch-norm running statistics)."""
        was_training = self.training
        self.eval()
        try:
            return self.forward(z)
        finally:
            self.train(was_training)
