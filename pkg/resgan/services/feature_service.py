"""Denoising-autoencoder feature space."""
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import torch
import torch.nn.functional as F

from resgan.exceptions import ConfigurationError, DataError, ShapeError, StatisticsError, TrainingError
from resgan.logging_config import log_performance
from resgan.models.dataset import Batch, DomainDataset
from resgan.models.features import FeatureStats
from resgan.networks.autoencoder import Autoencoder, Decoder, Encoder
from resgan.networks.generator import IMAGE_CHANNELS
from resgan.services.data_service import DataService
from resgan.utils.checksums import config_hash
from resgan.utils.seeding import derive_seed, numpy_rng
from resgan.utils.tensors import images_to_tensor, module_device, module_dtype

logger = logging.getLogger(__name__)

ENCODE_CHUNK = 256
MIN_HOLDOUT_POOL = 10


@dataclass
class AutoencoderFit:
    """Outcome of AE pretraining."""
    encoder: Encoder
    decoder: Decoder
    initial_loss: float
    final_loss: float
    steps: int
    losses: List[float] = field(default_factory=list)

    def metadata(self):
        return {
            'initial_loss': self.initial_loss,
            'final_loss': self.final_loss,
            'steps': self.steps,
        }


def _images(batch):
    return batch.images if isinstance(batch, (Batch, DomainDataset)) else np.asarray(batch)


class FeatureService:
    """Service for the frozen feature space E."""

    @staticmethod
    def split_holdout(n, fraction, rng):
        """
        (train indices, held-out indices). Pools smaller than 10 images
        are used whole on both sides.
        """
        order = rng.permutation(n)
        if n < MIN_HOLDOUT_POOL:
            return order, order
        n_holdout = min(n - 1, max(1, int(round(fraction * n))))
        return order[n_holdout:], order[:n_holdout]

    @staticmethod
    @torch.no_grad()
    def reconstruction_error(autoencoder, images, chunk=ENCODE_CHUNK):
        """Mean squared error of decode(encode(x)) against clean x."""
        images = _images(images)
        device = module_device(autoencoder)
        total, count = 0.0, 0
        for start in range(0, len(images), chunk):
            clean = images_to_tensor(images[start:start + chunk], device=device)
            total += float(F.mse_loss(autoencoder(clean), clean, reduction='sum'))
            count += clean.numel()
        return total / count

    @staticmethod
    @log_performance(threshold_ms=60000)
    def pretrain_autoencoder(dataset_x, dataset_y, config, device='cpu'):
        """
        Train the denoising AE on the union of both domains and freeze E.

        Args:
            dataset_x, dataset_y: Training domains (same image shape)
            config: ExperimentConfig; uses image_size, feature_dim,
                widths.encoder_base, autoencoder and seed

        Returns:
            AutoencoderFit with a frozen encoder

        Raises:
            DataError: an empty domain
            ShapeError: domains differ in image shape
            TrainingError: non-finite loss
        """
        if len(dataset_x) == 0 or len(dataset_y) == 0:
            raise DataError("Autoencoder pretraining needs two non-empty domains")
        if dataset_x.image_shape != dataset_y.image_shape:
            raise ShapeError(f"Domain shapes differ: {dataset_x.image_shape} vs {dataset_y.image_shape}")
        expected = (config.image_size, config.image_size, IMAGE_CHANNELS)
        if dataset_x.image_shape != expected:
            raise ShapeError(f"Domains are {dataset_x.image_shape}, the model expects {expected}")

        settings = config.autoencoder
        union = np.concatenate([dataset_x.images, dataset_y.images])
        rng = numpy_rng(config.seed, 'autoencoder')
        train_idx, holdout_idx = FeatureService.split_holdout(len(union), settings.holdout_fraction, rng)
        train_set = DomainDataset(domain_id='union', images=union[train_idx])
        holdout = union[holdout_idx]

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(config.seed, 'autoencoder'))
            model = Autoencoder(config.image_size, config.feature_dim, config.widths.encoder_base)
        model.to(device)
        optimizer = torch.optim.Adam(model.parameters(), lr=settings.lr)

        model.eval()
        initial_loss = FeatureService.reconstruction_error(model, holdout)
        logger.info(
            f"Pretraining AE on {len(train_set)} images ({len(holdout)} held out), "
            f"{settings.steps} steps, noise {settings.noise.kind}/{settings.noise.magnitude}, "
            f"initial held-out MSE {initial_loss:.5f}"
        )

        sampler = DataService.new_sampler(config.seed, 'autoencoder_batches')
        losses = []
        model.train()
        try:
            for step in range(settings.steps):
                batch = DataService.sample_batch(train_set, settings.batch_size, sampler)
                noisy = DataService.corrupt(batch, settings.noise, rng)
                clean_t = images_to_tensor(batch.images, device=device)
                noisy_t = images_to_tensor(noisy.images, device=device)

                loss = F.mse_loss(model(noisy_t), clean_t)
                value = float(loss)
                if not math.isfinite(value):
                    # parameters are still those of the last finite step
                    raise TrainingError(
                        f"Autoencoder loss became non-finite at step {step}",
                        last_finite_state={k: v.detach().clone() for k, v in model.state_dict().items()},
                        snapshot={'step': step, 'loss': value},
                    )
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                optimizer.step()
                losses.append(value)
        except TrainingError as e:
            logger.error(f"Autoencoder pretraining diverged: {e}", exc_info=True)
            raise

        model.eval()
        final_loss = FeatureService.reconstruction_error(model, holdout)
        model.encoder.freeze()
        logger.info(f"AE pretraining done: held-out MSE {initial_loss:.5f} -> {final_loss:.5f}")
        return AutoencoderFit(
            encoder=model.encoder,
            decoder=model.decoder,
            initial_loss=initial_loss,
            final_loss=final_loss,
            steps=settings.steps,
            losses=losses,
        )

    @staticmethod
    def autoencoder_metadata(fit, config):
        return {
            **fit.metadata(),
            'noise': {'kind': config.autoencoder.noise.kind, 'magnitude': config.autoencoder.noise.magnitude},
            'config_hash': config_hash(config),
        }

    @staticmethod
    @torch.no_grad()
    def encode(encoder, batch, chunk=ENCODE_CHUNK):
        """
        Features of a Batch or N x H x W x C array.

        Returns:
            float64 array, B x feature_dim

        Raises:
            ShapeError: images do not match the encoder input
        """
        images = _images(batch)
        expected = (encoder.image_size, encoder.image_size, IMAGE_CHANNELS)
        if images.ndim != 4 or tuple(images.shape[1:]) != expected:
            raise ShapeError(f"Encoder expects N x {expected}, got {images.shape}")

        was_training = encoder.training
        encoder.eval()
        try:
            device = module_device(encoder)
            dtype = module_dtype(encoder)
            rows = [
                encoder(images_to_tensor(images[start:start + chunk], device=device, dtype=dtype)).double().cpu().numpy()
                for start in range(0, len(images), chunk)
            ]
        finally:
            encoder.train(was_training)
        if not rows:
            return np.empty((0, encoder.feature_dim), dtype=np.float64)
        return np.concatenate(rows)

    @staticmethod
    def compute_domain_feature_stats(encoder, dataset):
        """
        Mean and unbiased covariance of E over a whole domain.

        Raises:
            ConfigurationError: encoder not frozen
            StatisticsError: fewer than 2 images
        """
        if not encoder.frozen:
            raise ConfigurationError("Feature statistics need a frozen encoder")
        if len(dataset) < 2:
            raise StatisticsError(f"Domain '{dataset.domain_id}' has {len(dataset)} images; at least 2 are needed")
        stats = FeatureStats.from_features(FeatureService.encode(encoder, dataset))
        logger.info(f"Feature stats for domain '{dataset.domain_id}': n={stats.n}, d={stats.dim}")
        return stats
