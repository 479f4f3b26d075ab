"""Paired sampling, latent walks and reconstruction from trained bundles."""
import logging

import numpy as np
import torch
import torch.nn.functional as F

from resgan.enums import DomainSide, InterpolationPath
from resgan.exceptions import CapabilityError, ConfigurationError, ShapeError, TrainingError
from resgan.logging_config import log_performance
from resgan.models.sample_grid import INTERPOLATION_ROWS, PAIRED_COLUMNS, SampleGrid
from resgan.networks.generator import IMAGE_CHANNELS
from resgan.services.model_service import ModelService
from resgan.utils.seeding import derive_seed, torch_generator
from resgan.utils.tensors import images_to_tensor, module_device, module_dtype, tensor_to_images

logger = logging.getLogger(__name__)

CALIBRATION_SAMPLES = 1024
SLERP_EPS = 1e-8


def interpolation_weights(steps):
    """``steps`` points t = 0 ... 1 (float64, exact endpoints)."""
    if steps < 2:
        raise ConfigurationError(f"Interpolation needs steps >= 2, got {steps}")
    return np.linspace(0.0, 1.0, steps)


def lerp(z0, z1, t):
    return (1.0 - t) * z0 + t * z1


def slerp(z0, z1, t):
    """Great-circle interpolation; falls back to lerp for (anti)parallel endpoints."""
    n0, n1 = np.linalg.norm(z0), np.linalg.norm(z1)
    if n0 == 0.0 or n1 == 0.0:
        return lerp(z0, z1, t)
    cos_omega = np.clip(np.dot(z0 / n0, z1 / n1), -1.0, 1.0)
    omega = np.arccos(cos_omega)
    sin_omega = np.sin(omega)
    if sin_omega < SLERP_EPS:
        return lerp(z0, z1, t)
    return (np.sin((1.0 - t) * omega) * z0 + np.sin(t * omega) * z1) / sin_omega


def _as_latent(z, z_dim, name):
    array = np.asarray(z.detach().cpu().numpy() if torch.is_tensor(z) else z, dtype=np.float64)
    if array.ndim == 2 and array.shape[0] == 1:
        array = array[0]
    if array.shape != (z_dim,):
        raise ShapeError(f"{name} must have shape ({z_dim},), got {array.shape}")
    return array


def _bundle(state_or_bundle):
    return getattr(state_or_bundle, 'bundle', state_or_bundle)


class InferenceService:
    """Service for read-only use of trained generators."""

    @staticmethod
    @torch.no_grad()
    def generate_from_z(bundle, z, checkpoint_hash=None, layout=PAIRED_COLUMNS, pairs_per_row=4, extra=None):
        """
        G^x(z) and G^y(z) in inference mode.

        Returns:
            SampleGrid holding both image sets and the float32 latents used
        """
        bundle = _bundle(bundle)
        z = torch.as_tensor(np.asarray(z) if not torch.is_tensor(z) else z, dtype=torch.float32).cpu()
        device, dtype = module_device(bundle.gen_x), module_dtype(bundle.gen_x)
        z_in = z.to(device=device, dtype=dtype)
        images_x = tensor_to_images(bundle.gen_x.generate(z_in))
        images_y = tensor_to_images(bundle.gen_y.generate(z_in))
        return SampleGrid(
            images_x=images_x,
            images_y=images_y,
            z=z.numpy(),
            checkpoint_hash=checkpoint_hash,
            layout=layout,
            pairs_per_row=pairs_per_row,
            extra=extra or {},
        )

    @staticmethod
    def sample_pairs(state, n, seed, pairs_per_row=4):
        """
        n latents from P_z (``samples`` stream of ``seed``) through both generators.

        Args:
            state: TrainingState restored from a checkpoint
        """
        if n < 1:
            raise ConfigurationError(f"n must be >= 1, got {n}")
        z = ModelService.sample_latent(state.config.latent, n, torch_generator(seed, 'samples'))
        grid = InferenceService.generate_from_z(
            state.bundle, z, checkpoint_hash=state.checkpoint_hash, pairs_per_row=pairs_per_row,
            extra={'seed': seed},
        )
        logger.info(f"Sampled {n} pairs at iteration {state.iteration}")
        return grid

    @staticmethod
    def interpolate(state, z0, z1, steps, path=InterpolationPath.LINEAR.value):
        """
        Walk from z0 to z1 in ``steps`` frames; both generators at every frame.

        Each frame is generated on its own, so frames 0 and steps-1 equal
        generate_from_z at z0 and z1 exactly.

        Raises:
            ConfigurationError: steps < 2 or unknown path
            ShapeError: z dimension mismatch
        """
        z_dim = state.config.latent.z_dim
        a = _as_latent(z0, z_dim, 'z0')
        b = _as_latent(z1, z_dim, 'z1')
        t_values = interpolation_weights(steps)
        if path == InterpolationPath.LINEAR.value:
            walk = lerp
        elif path == InterpolationPath.SPHERICAL.value:
            walk = slerp
        else:
            raise ConfigurationError(f"Unknown interpolation path: {path}")

        latents = np.stack([walk(a, b, t) for t in t_values])
        latents[0], latents[-1] = a, b
        latents = latents.astype(np.float32)

        frames = [InferenceService.generate_from_z(state.bundle, latents[i:i + 1]) for i in range(steps)]
        return SampleGrid(
            images_x=np.concatenate([frame.images_x for frame in frames]),
            images_y=np.concatenate([frame.images_y for frame in frames]),
            z=latents,
            checkpoint_hash=state.checkpoint_hash,
            layout=INTERPOLATION_ROWS,
            extra={'path': path, 't': t_values.tolist()},
        )

    # ==========================================
    # RECONSTRUCTION
    # ==========================================

    @staticmethod
    @log_performance(threshold_ms=60000)
    def train_z_mapper(state_or_bundle, config, device=None):
        """
        Fit a ZMapper regressing z from E(G^x(z)) and E(G^y(z)).

        G and E stay frozen; latents come from the ``mapper_batches``
        stream, initial weights from the ``mapper`` stream.

        Returns:
            The bundle, with ``mapper`` set and in eval mode

        Raises:
            CapabilityError: the bundle has no encoder
            TrainingError: non-finite regression loss
        """
        bundle = _bundle(state_or_bundle)
        if bundle.encoder is None:
            raise CapabilityError("Training a z-mapper needs the bundle's frozen encoder")
        settings = config.mapper
        device = device or module_device(bundle.gen_x)
        dtype = module_dtype(bundle.gen_x)

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(config.seed, 'mapper'))
            mapper = ModelService.build_z_mapper(config.feature_dim, config.latent.z_dim, settings.hidden)
        mapper.to(device=device, dtype=dtype)

        latents = torch_generator(config.seed, 'mapper_batches')

        @torch.no_grad()
        def features_of(z):
            z = z.to(device=device, dtype=dtype)
            return bundle.encoder(bundle.gen_x.generate(z)), bundle.encoder(bundle.gen_y.generate(z)), z

        bundle.encoder.eval()
        fx, fy, _ = features_of(ModelService.sample_latent(config.latent, CALIBRATION_SAMPLES, latents))
        mapper.calibrate(torch.cat([fx, fy]))

        optimizer = torch.optim.Adam(mapper.parameters(), lr=settings.lr)
        mapper.train()
        losses = []
        try:
            for step in range(settings.steps):
                fx, fy, z = features_of(ModelService.sample_latent(config.latent, settings.batch_size, latents))
                loss = F.mse_loss(mapper(fx), z) + F.mse_loss(mapper(fy), z)
                value = float(loss)
                if not np.isfinite(value):
                    raise TrainingError(
                        f"Mapper loss became non-finite at step {step}",
                        snapshot={'step': step, 'loss': value},
                    )
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                optimizer.step()
                losses.append(value)
        except TrainingError as e:
            logger.error(f"Mapper training diverged: {e}", exc_info=True)
            raise

        mapper.eval()
        bundle.mapper = mapper
        if losses:
            logger.info(f"Mapper trained for {settings.steps} steps: loss {losses[0]:.5f} -> {losses[-1]:.5f}")
        return bundle

    @staticmethod
    @torch.no_grad()
    def recover_latents(bundle, images, encoder=None):
        """ẑ = M(E(images)) for an N x H x W x C array."""
        bundle = _bundle(bundle)
        if bundle.mapper is None:
            raise CapabilityError("This checkpoint has no trained z-mapper; run train-mapper first")
        encoder = encoder or bundle.encoder
        if encoder is None:
            raise CapabilityError("Reconstruction needs the frozen encoder")
        images = np.asarray(images)
        expected = (encoder.image_size, encoder.image_size, IMAGE_CHANNELS)
        if images.ndim != 4 or tuple(images.shape[1:]) != expected:
            raise ShapeError(f"Expected N x {expected} images, got {images.shape}")
        encoder.eval()
        bundle.mapper.eval()
        device, dtype = module_device(encoder), module_dtype(encoder)
        features = encoder(images_to_tensor(images, device=device, dtype=dtype))
        return bundle.mapper(features.to(module_dtype(bundle.mapper)))

    @staticmethod
    @torch.no_grad()
    def reconstruct(state, image, source_domain, encoder=None):
        """
        Real image -> (reconstruction, resemble image of the other domain).

        Args:
            image: H x W x C array in [-1, 1] at model resolution
            source_domain: 'x' or 'y'

        Returns:
            (G^source(ẑ), G^other(ẑ)) as H x W x C float32 arrays

        Raises:
            CapabilityError: no mapper
            ShapeError: wrong resolution
        """
        side = DomainSide(getattr(source_domain, 'value', source_domain))
        bundle = _bundle(state)
        image = np.asarray(image)
        batch = image[None] if image.ndim == 3 else image
        if batch.shape[0] != 1:
            raise ShapeError(f"reconstruct takes a single image, got {batch.shape[0]}")

        z_hat = InferenceService.recover_latents(bundle, batch, encoder)
        source_gen, other_gen = bundle.generator(side), bundle.generator(side.other)
        z_hat = z_hat.to(module_dtype(source_gen))
        reconstruction = tensor_to_images(source_gen.generate(z_hat))[0]
        resemble = tensor_to_images(other_gen.generate(z_hat))[0]
        return reconstruction, resemble
