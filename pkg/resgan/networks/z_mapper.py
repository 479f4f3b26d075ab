"""Feature-to-latent mapper used for reconstruction."""
import torch
from torch import nn


class ZMapper(nn.Module):
    """
    Three fully connected layers: feature_dim -> hidden -> hidden -> z_dim.

    Inputs are standardized with the ``feature_mean`` / ``feature_std``
    buffers, set once from a calibration batch before training.
    """

    def __init__(self, feature_dim, z_dim, hidden=256):
        super().__init__()
        self.feature_dim = feature_dim
        self.z_dim = z_dim
        self.hidden = hidden
        self.register_buffer('feature_mean', torch.zeros(feature_dim))
        self.register_buffer('feature_std', torch.ones(feature_dim))
        self.main = nn.Sequential(
            nn.Linear(feature_dim, hidden),
            nn.LeakyReLU(0.2),
            nn.Linear(hidden, hidden),
            nn.LeakyReLU(0.2),
            nn.Linear(hidden, z_dim),
        )

    @torch.no_grad()
    def calibrate(self, features, eps=1e-6):
        self.feature_mean.copy_(features.mean(dim=0))
        self.feature_std.copy_(features.std(dim=0, unbiased=False).clamp_min(eps))

    def forward(self, features):
        return self.main((features - self.feature_mean) / self.feature_std)
