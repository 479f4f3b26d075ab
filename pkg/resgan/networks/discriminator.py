"""Image and feature discriminators."""
import torch
from torch import nn

from resgan.networks.generator import IMAGE_CHANNELS
from resgan.networks.init import ladder_depth


class ImageDiscriminator(nn.Module):
    """
    DCGAN discriminator: images (B x 3 x S x S) -> probabilities (B,).

    ``head_in`` is the first conv (unshared in the CoGAN pair); ``trunk`` is
    every later stage down to the scalar logit.
    """

    def __init__(self, image_size, base_width, domain_id='x', trunk=None):
        super().__init__()
        self.image_size = image_size
        self.domain_id = domain_id

        depth = ladder_depth(image_size)
        widths = [base_width * 2 ** i for i in range(depth)]
        self.head_in = nn.Sequential(
            nn.Conv2d(IMAGE_CHANNELS, widths[0], 4, 2, 1, bias=False),
            nn.LeakyReLU(0.2, inplace=False),
        )
        self.trunk = trunk if trunk is not None else self._build_trunk(widths)

    @staticmethod
    def _build_trunk(widths):
        layers = []
        for in_ch, out_ch in zip(widths[:-1], widths[1:]):
            layers += [
                nn.Conv2d(in_ch, out_ch, 4, 2, 1, bias=False),
                nn.BatchNorm2d(out_ch),
                nn.LeakyReLU(0.2, inplace=False),
            ]
        layers += [nn.Conv2d(widths[-1], 1, 4, 1, 0, bias=False), nn.Flatten(0)]
        return nn.Sequential(*layers)

    def logits(self, images):
        return self.trunk(self.head_in(images))

    def forward(self, images):
        return torch.sigmoid(self.logits(images))


class FeatureDiscriminator(nn.Module):
    """Manifold discriminator on encoder features: B x d -> probabilities (B,)."""

    def __init__(self, feature_dim, domain_id='x'):
        super().__init__()
        self.feature_dim = feature_dim
        self.domain_id = domain_id
        hidden = max(feature_dim // 2, 1)
        self.main = nn.Sequential(
            nn.Linear(feature_dim, feature_dim),
            nn.LeakyReLU(0.2),
            nn.Linear(feature_dim, hidden),
            nn.LeakyReLU(0.2),
            nn.Linear(hidden, 1),
            nn.Flatten(0),
        )

    def logits(self, features):
        return self.main(features)

    def forward(self, features):
        return torch.sigmoid(self.logits(features))
