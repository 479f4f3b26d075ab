"""Generators, discriminators, the CoGAN pair and the z-mapper."""
import numpy as np
import pytest
import torch

from resgan.exceptions import ConfigurationError
from resgan.models.experiment import LatentSpec, WidthConfig
from resgan.networks.autoencoder import Encoder
from resgan.networks.discriminator import FeatureDiscriminator, ImageDiscriminator
from resgan.networks.generator import Generator
from resgan.services.model_service import ModelService
from resgan.utils.checksums import parameter_checksum
from resgan.utils.seeding import torch_generator

WIDTHS = WidthConfig(generator_base=8, discriminator_base=8, encoder_base=4)


def finite_difference_check(fn, x, n_coords=10, eps=1e-6, seed=0):
    """Compare autograd input gradients of sum(fn(x)) with central differences."""
    x = x.clone().requires_grad_(True)
    fn(x).sum().backward()
    analytic = x.grad.detach().flatten()
    coords = np.random.default_rng(seed).choice(x.numel(), size=n_coords, replace=False)
    base = x.detach().flatten()
    for i in coords:
        plus, minus = base.clone(), base.clone()
        plus[i] += eps
        minus[i] -= eps
        numeric = (fn(plus.view_as(x)).sum() - fn(minus.view_as(x)).sum()) / (2 * eps)
        assert float(analytic[i]) == pytest.approx(float(numeric), rel=1e-3, abs=1e-7)


class TestGenerator:

    @pytest.mark.parametrize('size', [32, 64])
    def test_output_shape_and_range(self, size):
        torch.manual_seed(0)
        gen = Generator(8, size, 8)
        images = gen(torch.rand(3, 8) * 2 - 1)
        assert images.shape == (3, 3, size, size)
        assert images.min() > -1.0 and images.max() < 1.0

    def test_generate_is_deterministic_and_restores_mode(self):
        torch.manual_seed(0)
        gen = Generator(8, 32, 8)
        z = torch.rand(4, 8)
        assert torch.equal(gen.generate(z), gen.generate(z))
        assert gen.training

    def test_unsupported_size(self):
        with pytest.raises(ConfigurationError):
            ModelService.build_generator(LatentSpec(z_dim=8), 48, WIDTHS)

    def test_input_gradient_matches_finite_differences(self):
        torch.manual_seed(1)
        gen = Generator(4, 32, 4).double().eval()
        finite_difference_check(lambda z: gen(z), torch.rand(2, 4, dtype=torch.float64))


class TestDiscriminators:

    def test_probabilities_in_open_interval(self, rng):
        torch.manual_seed(0)
        disc = ImageDiscriminator(32, 8)
        images = torch.as_tensor(rng.uniform(-1, 1, size=(5, 3, 32, 32)), dtype=torch.float32)
        p = disc(images)
        assert p.shape == (5,)
        assert torch.all((p > 0) & (p < 1))

    def test_image_gradient_matches_finite_differences(self, rng):
        torch.manual_seed(2)
        disc = ImageDiscriminator(32, 4).double().eval()
        images = torch.as_tensor(rng.uniform(-1, 1, size=(2, 3, 32, 32)), dtype=torch.float64)
        finite_difference_check(lambda x: disc.logits(x), images)

    def test_feature_gradient_matches_finite_differences(self, rng):
        torch.manual_seed(3)
        disc = FeatureDiscriminator(6).double()
        features = torch.as_tensor(rng.normal(size=(4, 6)), dtype=torch.float64)
        finite_difference_check(lambda f: disc.logits(f), features)

    def test_feature_discriminator_is_row_wise(self, rng):
        torch.manual_seed(0)
        disc = FeatureDiscriminator(8)
        features = torch.as_tensor(rng.normal(size=(6, 8)), dtype=torch.float32)
        permutation = torch.as_tensor(rng.permutation(6))
        torch.testing.assert_close(disc(features)[permutation], disc(features[permutation]))

    def test_image_discriminator_in_eval_is_row_wise(self, rng):
        torch.manual_seed(0)
        disc = ImageDiscriminator(32, 8).eval()
        images = torch.as_tensor(rng.uniform(-1, 1, size=(4, 3, 32, 32)), dtype=torch.float32)
        torch.testing.assert_close(disc(images)[1:2], disc(images[1:2]), rtol=1e-5, atol=1e-6)


class TestCoganPair:

    @staticmethod
    def pair():
        torch.manual_seed(0)
        return ModelService.build_cogan_pair(LatentSpec(z_dim=8), 32, WIDTHS)

    def test_shared_layers_are_one_module(self):
        pair = self.pair()
        assert pair.is_tied()
        assert pair.gen_x.trunk is pair.gen_y.trunk
        assert pair.disc_x.trunk is pair.disc_y.trunk
        assert pair.gen_x.head is not pair.gen_y.head
        assert pair.disc_x.head_in is not pair.disc_y.head_in
        assert pair.manifest

    def test_tied_layers_stay_identical_after_training(self):
        pair = self.pair()
        modules = [pair.gen_x, pair.gen_y, pair.disc_x, pair.disc_y]
        params = {id(p): p for m in modules for p in m.parameters()}.values()
        optimizer = torch.optim.Adam(params, lr=1e-3)
        generator = torch_generator(0)
        for _ in range(100):
            z = torch.rand(4, 8, generator=generator)
            loss = pair.disc_x(pair.gen_x(z)).mean() - pair.disc_y(pair.gen_y(z)).mean()
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        for a, b in zip(pair.gen_x.trunk.parameters(), pair.gen_y.trunk.parameters()):
            assert a is b
        assert parameter_checksum(pair.gen_x.trunk) == parameter_checksum(pair.gen_y.trunk)
        assert parameter_checksum(pair.gen_x.head) != parameter_checksum(pair.gen_y.head)

    def test_shared_gradient_is_sum_of_domain_gradients(self):
        pair = self.pair()
        z = torch.rand(4, 8, generator=torch_generator(1))
        shared = list(pair.gen_x.trunk.parameters())

        def domain_loss(gen, disc):
            return -torch.log(disc(gen(z))).mean()

        manual = [torch.zeros_like(p) for p in shared]
        for gen, disc in ((pair.gen_x, pair.disc_x), (pair.gen_y, pair.disc_y)):
            grads = torch.autograd.grad(domain_loss(gen, disc), shared)
            manual = [m + g for m, g in zip(manual, grads)]

        joint = torch.autograd.grad(
            domain_loss(pair.gen_x, pair.disc_x) + domain_loss(pair.gen_y, pair.disc_y), shared)
        for m, j in zip(manual, joint):
            torch.testing.assert_close(j, m, rtol=1e-5, atol=1e-7)


class TestBundle:

    def test_resembled_bundle_has_four_discriminators(self, make_config, frozen_encoder):
        bundle = ModelService.build_bundle(make_config(), frozen_encoder)
        assert len(bundle.discriminators()) == 4
        assert not bundle.is_tied

    def test_feature_mode_needs_encoder(self, make_config):
        with pytest.raises(ConfigurationError):
            ModelService.build_bundle(make_config(mode='ablation_omega0'))

    def test_encoder_must_match_config(self, make_config):
        torch.manual_seed(0)
        with pytest.raises(ConfigurationError):
            ModelService.build_bundle(make_config(), Encoder(32, 7, 4).freeze())

    def test_same_seed_same_initialization(self, tiny_config):
        a = ModelService.build_bundle(tiny_config)
        b = ModelService.build_bundle(tiny_config)
        assert parameter_checksum(*a.modules().values()) == parameter_checksum(*b.modules().values())

    def test_build_leaves_global_rng_alone(self, tiny_config):
        torch.manual_seed(123)
        expected = torch.rand(3)
        torch.manual_seed(123)
        ModelService.build_bundle(tiny_config)
        assert torch.equal(torch.rand(3), expected)

    def test_latents_follow_distribution(self):
        uniform = ModelService.sample_latent(LatentSpec(z_dim=5), 1000, torch_generator(0))
        assert uniform.shape == (1000, 5)
        assert uniform.min() >= -1.0 and uniform.max() <= 1.0
        normal = ModelService.sample_latent(LatentSpec(z_dim=5, distribution='standard_normal'), 1000, torch_generator(0))
        assert abs(float(normal.std()) - 1.0) < 0.1


class TestZMapper:

    def test_shapes(self):
        mapper = ModelService.build_z_mapper(16, 8, hidden=32)
        assert mapper(torch.randn(5, 16)).shape == (5, 8)

    def test_calibration_standardizes_inputs(self):
        mapper = ModelService.build_z_mapper(4, 2, hidden=8)
        features = torch.randn(100, 4) * 5 + 3
        mapper.calibrate(features)
        standardized = (features - mapper.feature_mean) / mapper.feature_std
        torch.testing.assert_close(standardized.mean(dim=0), torch.zeros(4), atol=1e-5, rtol=0)

    def test_invalid_dimension(self):
        with pytest.raises(ConfigurationError):
            ModelService.build_z_mapper(0, 8)
