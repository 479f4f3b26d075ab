"""Loss terms of the four-discriminator game and the feature covariance constraint."""
import logging

import torch

from resgan.enums import AdversarialMode, FcMode
from resgan.exceptions import ConfigurationError, NumericError, ShapeError
from resgan.models.losses import LossBreakdown

logger = logging.getLogger(__name__)

PROBABILITY_EPS = 1e-7


def clamp_probabilities(p, what='probabilities'):
    """
    Clamp into [eps, 1 - eps].

    Raises:
        NumericError: NaN, or values outside [0, 1] before clamping
    """
    p = torch.as_tensor(p)
    if not torch.is_floating_point(p):
        p = p.double()
    if torch.isnan(p).any():
        raise NumericError(f"{what} contain NaN")
    if (p < 0).any() or (p > 1).any():
        raise NumericError(f"{what} outside [0, 1]: min={float(p.min()):.4g}, max={float(p.max()):.4g}")
    return p.clamp(PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)


class ObjectiveService:
    """Pure loss functions."""

    @staticmethod
    def discriminator_loss(d_real, d_fake):
        """-mean log D(real) - mean log(1 - D(fake))."""
        d_real = clamp_probabilities(d_real, 'D(real)')
        d_fake = clamp_probabilities(d_fake, 'D(fake)')
        return -torch.log(d_real).mean() - torch.log1p(-d_fake).mean()

    @staticmethod
    def generator_adversarial_loss(d_fake, variant):
        """
        non_saturating: -mean log D(G(z)); minimax: mean log(1 - D(G(z))).
        """
        d_fake = clamp_probabilities(d_fake, 'D(G(z))')
        if variant.adversarial_mode == AdversarialMode.NON_SATURATING.value:
            return -torch.log(d_fake).mean()
        if variant.adversarial_mode == AdversarialMode.MINIMAX.value:
            return torch.log1p(-d_fake).mean()
        raise ConfigurationError(f"Unknown adversarial mode: {variant.adversarial_mode}")

    @staticmethod
    def feature_covariance_loss(feat_x, feat_y, mu_x, mu_y, variant):
        """
        L_fc over a batch whose rows share their latent.

        centered_difference: mean_b ||(f_x - mu_x) - (f_y - mu_y)||_1
        concatenation:       mean_b ||f_x - mu_x||_1 + ||f_y - mu_y||_1

        Raises:
            ShapeError: batch or feature dimensions disagree
        """
        feat_x, feat_y = torch.as_tensor(feat_x), torch.as_tensor(feat_y)
        if feat_x.ndim != 2 or feat_x.shape != feat_y.shape:
            raise ShapeError(f"Feature batches must both be B x d, got {tuple(feat_x.shape)} and {tuple(feat_y.shape)}")
        mu_x = torch.as_tensor(mu_x, dtype=feat_x.dtype, device=feat_x.device)
        mu_y = torch.as_tensor(mu_y, dtype=feat_y.dtype, device=feat_y.device)
        d = feat_x.shape[1]
        if mu_x.shape != (d,) or mu_y.shape != (d,):
            raise ShapeError(f"Domain means must have length {d}, got {tuple(mu_x.shape)} and {tuple(mu_y.shape)}")

        residual_x = feat_x - mu_x
        residual_y = feat_y - mu_y
        if variant.fc_mode == FcMode.CENTERED_DIFFERENCE.value:
            return (residual_x - residual_y).abs().sum(dim=1).mean()
        if variant.fc_mode == FcMode.CONCATENATION.value:
            return (residual_x.abs().sum(dim=1) + residual_y.abs().sum(dim=1)).mean()
        raise ConfigurationError(f"Unknown fc mode: {variant.fc_mode}")

    @staticmethod
    def total_generator_loss(g_x_adv, g_y_adv, g_xf_adv=0.0, g_yf_adv=0.0, fc=0.0, omega=1.0):
        """
        Aggregate the generator terms: total_g = four adversarial terms + omega * fc.

        Raises:
            ConfigurationError: negative omega
        """
        if omega < 0:
            raise ConfigurationError(f"omega must be >= 0, got {omega}")
        total = g_x_adv + g_y_adv + g_xf_adv + g_yf_adv
        if omega != 0:
            total = total + omega * fc
        return LossBreakdown(
            g_x_adv=g_x_adv, g_y_adv=g_y_adv, g_xf_adv=g_xf_adv, g_yf_adv=g_yf_adv,
            fc=fc, omega=float(omega), total_g=total,
        )

    @staticmethod
    def total_discriminator_loss(d_x, d_y, d_xf=0.0, d_yf=0.0):
        return LossBreakdown(d_x=d_x, d_y=d_y, d_xf=d_xf, d_yf=d_yf, total_d=d_x + d_y + d_xf + d_yf)
