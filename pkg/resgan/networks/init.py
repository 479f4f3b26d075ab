"""DCGAN weight initialization."""
from torch import nn


def weights_init(module):
    """N(0, 0.02) for conv and linear weights, N(1, 0.02) for batch-norm scales."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight.data, 0.0, 0.02)
        if module.bias is not None:
            nn.init.constant_(module.bias.data, 0.0)
    elif isinstance(module, (nn.BatchNorm1d, nn.BatchNorm2d)):
        nn.init.normal_(module.weight.data, 1.0, 0.02)
        nn.init.constant_(module.bias.data, 0.0)


def ladder_depth(image_size):
    """Number of stride-2 stages between 4 x 4 and ``image_size``."""
    depth = 0
    side = image_size
    while side > 4:
        side //= 2
        depth += 1
    return depth
