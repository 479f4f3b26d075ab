"""Convolutional denoising autoencoder."""
from torch import nn

from resgan.networks.generator import IMAGE_CHANNELS
from resgan.networks.init import ladder_depth


class Encoder(nn.Module):
    """
    Images (B x 3 x S x S) -> features (B x feature_dim).

    Same stride-2 ladder as the image discriminator, without batch norm so
    each row depends only on its own image.
    """

    def __init__(self, image_size, feature_dim, base_width):
        super().__init__()
        self.image_size = image_size
        self.feature_dim = feature_dim
        self.base_width = base_width
        self._frozen = False

        depth = ladder_depth(image_size)
        widths = [base_width * 2 ** i for i in range(depth)]
        layers = []
        in_ch = IMAGE_CHANNELS
        for out_ch in widths:
            layers += [nn.Conv2d(in_ch, out_ch, 4, 2, 1), nn.LeakyReLU(0.2)]
            in_ch = out_ch
        layers += [nn.Flatten(1), nn.Linear(widths[-1] * 4 * 4, feature_dim)]
        self.main = nn.Sequential(*layers)

    @property
    def frozen(self):
        return self._frozen

    def freeze(self):
        """Exclude every parameter from training and pin eval mode."""
        self._frozen = True
        for parameter in self.parameters():
            parameter.requires_grad_(False)
        return self.eval()

    def train(self, mode=True):
        return super().train(mode and not getattr(self, '_frozen', False))

    def forward(self, images):
        return self.main(images)


class Decoder(nn.Module):
    """Features (B x feature_dim) -> images (B x 3 x S x S) in (-1, 1)."""

    def __init__(self, image_size, feature_dim, base_width):
        super().__init__()
        depth = ladder_depth(image_size)
        widths = [base_width * 2 ** (depth - 1 - i) for i in range(depth)]
        layers = [
            nn.Linear(feature_dim, widths[0] * 4 * 4),
            nn.Unflatten(1, (widths[0], 4, 4)),
            nn.ReLU(True),
        ]
        for in_ch, out_ch in zip(widths[:-1], widths[1:]):
            layers += [nn.ConvTranspose2d(in_ch, out_ch, 4, 2, 1), nn.ReLU(True)]
        layers += [nn.ConvTranspose2d(widths[-1], IMAGE_CHANNELS, 4, 2, 1), nn.Tanh()]
        self.main = nn.Sequential(*layers)

    def forward(self, features):
        return self.main(features)


class Autoencoder(nn.Module):
    """Encoder + decoder pair trained on corrupted inputs."""

    def __init__(self, image_size, feature_dim, base_width):
        super().__init__()
        self.encoder = Encoder(image_size, feature_dim, base_width)
        self.decoder = Decoder(image_size, feature_dim, base_width)

    def forward(self, images):
        return self.decoder(self.encoder(images))
