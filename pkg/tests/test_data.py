"""Synthetic domains, folder ingestion, augmentation, batching and corruption."""
import numpy as np
import pytest
from PIL import Image

from resgan.exceptions import ConfigurationError, DataError
from resgan.models.dataset import AttributeRecord, DomainDataset, SamplerState
from resgan.models.experiment import AffineParams, NoiseSpec
from resgan.schemas import load_experiment_config
from resgan.services.attribute_service import extract_attributes
from resgan.services.data_service import DataService
from resgan.services.synthetic_service import SyntheticService, render_image


def synthetic_spec(**values):
    return load_experiment_config({'data': {'synthetic': values}}).data.synthetic


def hue_distance(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


class TestSyntheticDomains:

    def test_counts_shapes_and_range(self):
        domain_x, domain_y = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=1000, seed=1))
        for domain in (domain_x, domain_y):
            assert domain.images.shape == (1000, 32, 32, 3)
            assert domain.images.dtype == np.float32
            assert domain.images.min() >= -1.0 and domain.images.max() <= 1.0
            assert len(domain.attributes) == 1000
        assert {r.shape_class for r in domain_x.attributes} == {'circle'}
        assert {r.shape_class for r in domain_y.attributes} == {'square'}

    def test_same_seed_same_pixels(self):
        first = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=20, seed=4))
        second = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=20, seed=4))
        for a, b in zip(first, second):
            assert np.array_equal(a.images, b.images)

    def test_domains_are_unpaired(self):
        domain_x, domain_y = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=50, seed=4))
        hues_x = [r.hue for r in domain_x.attributes]
        hues_y = [r.hue for r in domain_y.attributes]
        assert hues_x != hues_y

    def test_images_are_read_only(self):
        domain_x, _ = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=2))
        with pytest.raises(ValueError):
            domain_x.images[0, 0, 0, 0] = 0.0

    @pytest.mark.parametrize('shape', ['circle', 'square', 'ring', 'triangle'])
    def test_attribute_round_trip(self, shape):
        record = AttributeRecord(hue=0.0, center_x=0.5, center_y=0.5, size=0.5, shape_class=shape)
        recovered = extract_attributes(render_image(record, 32))
        assert hue_distance(recovered.hue, record.hue) <= 0.05
        assert recovered.center_x == pytest.approx(0.5, abs=0.05)
        assert recovered.center_y == pytest.approx(0.5, abs=0.05)
        assert recovered.size == pytest.approx(0.5, abs=0.05)

    def test_blank_image_has_no_attributes(self):
        assert extract_attributes(np.full((32, 32, 3), -1.0, dtype=np.float32)) is None

    def test_invalid_attribute_record(self):
        with pytest.raises(DataError):
            AttributeRecord(hue=1.0, center_x=0.5, center_y=0.5, size=0.5)


class TestFolderIngestion:

    @staticmethod
    def write_images(directory, n, size=(64, 64), mode='RGB', color=(200, 30, 30)):
        directory.mkdir(parents=True, exist_ok=True)
        for i in range(n):
            Image.new(mode, size, color).save(directory / f'img_{i:03d}.png')
        return directory

    def test_loads_every_image(self, tmp_path):
        folder = self.write_images(tmp_path / 'faces', 10)
        domain = DataService.load_image_domain(folder, 64)
        assert domain.images.shape == (10, 64, 64, 3)
        assert domain.domain_id == 'faces'

    def test_non_square_is_center_cropped(self, tmp_path):
        folder = self.write_images(tmp_path / 'wide', 2, size=(80, 60))
        assert DataService.load_image_domain(folder, 32).images.shape == (2, 32, 32, 3)

    def test_grayscale_mid_gray_maps_to_zero(self, tmp_path):
        folder = self.write_images(tmp_path / 'gray', 1, size=(32, 32), mode='L', color=128)
        images = DataService.load_image_domain(folder, 32).images
        assert images.shape == (1, 32, 32, 3)
        assert np.abs(images).max() <= 1.0 / 255.0 + 1e-6

    def test_undecodable_files_are_skipped(self, tmp_path):
        folder = self.write_images(tmp_path / 'mixed', 2)
        (folder / 'broken.png').write_bytes(b'not a png')
        assert len(DataService.load_image_domain(folder, 32)) == 2

    def test_all_undecodable_is_an_error(self, tmp_path):
        folder = tmp_path / 'broken'
        folder.mkdir()
        (folder / 'a.png').write_bytes(b'junk')
        with pytest.raises(DataError):
            DataService.load_image_domain(folder, 32)

    def test_empty_directory_is_an_error(self, tmp_path):
        (tmp_path / 'empty').mkdir()
        with pytest.raises(DataError):
            DataService.load_image_domain(tmp_path / 'empty', 32)

    def test_saved_synthetic_domain_reloads_with_attributes(self, tmp_path):
        domain_x, _ = SyntheticService.generate_synthetic_pair(synthetic_spec(n_per_domain=5, seed=2))
        DataService.save_domain(domain_x, tmp_path / 'x')
        reloaded = DataService.load_domain_directory(tmp_path / 'x', 32, domain_id='x')
        assert reloaded.attributes == domain_x.attributes
        np.testing.assert_allclose(reloaded.images, domain_x.images, atol=1.0 / 255.0 + 1e-6)


class TestAugmentation:

    @staticmethod
    def domain(n=10):
        spec = synthetic_spec(n_per_domain=n, seed=9)
        return SyntheticService.generate_synthetic_pair(spec)[0]

    def test_factor_one_is_identity(self):
        domain = self.domain()
        assert DataService.augment_affine(domain, 1, AffineParams(), seed=0) is domain

    def test_factor_ten_enlarges_tenfold(self):
        domain = self.domain()
        augmented = DataService.augment_affine(domain, 10, AffineParams(), seed=0)
        assert len(augmented) == 100
        assert len(augmented.attributes) == 100
        assert np.array_equal(augmented.images[:10], domain.images)
        assert augmented.images.min() >= -1.0 and augmented.images.max() <= 1.0
        assert not np.array_equal(augmented.images[10:20], domain.images)

    def test_augmentation_is_seeded(self):
        domain = self.domain(4)
        a = DataService.augment_affine(domain, 3, AffineParams(), seed=5)
        b = DataService.augment_affine(domain, 3, AffineParams(), seed=5)
        assert np.array_equal(a.images, b.images)

    def test_factor_below_one_rejected(self):
        with pytest.raises(ConfigurationError):
            DataService.augment_affine(self.domain(2), 0, AffineParams(), seed=0)


class TestBatching:

    @staticmethod
    def blank(n):
        return DomainDataset(domain_id='blank', images=np.zeros((n, 4, 4, 3), dtype=np.float32))

    def test_draws_are_uniform(self):
        dataset = self.blank(1000)
        state = SamplerState.from_seed(0)
        counts = np.zeros(1000)
        for _ in range(10000):
            batch = DataService.sample_batch(dataset, 3, state)
            np.add.at(counts, batch.indices, 1)
        expected = 30000 / 1000
        sigma = np.sqrt(expected * (1 - 1 / 1000))
        assert np.all(np.abs(counts - expected) <= 3 * sigma)
        assert state.epoch == 30

    def test_no_repeats_within_an_epoch(self):
        batch = DataService.sample_batch(self.blank(5), 5, SamplerState.from_seed(1))
        assert sorted(batch.indices.tolist()) == [0, 1, 2, 3, 4]

    def test_sampler_state_round_trip_continues_identically(self):
        dataset = self.blank(7)
        state = SamplerState.from_seed(3)
        DataService.sample_batch(dataset, 4, state)
        restored = SamplerState.from_dict(state.to_dict())
        for _ in range(5):
            a = DataService.sample_batch(dataset, 3, state)
            b = DataService.sample_batch(dataset, 3, restored)
            assert np.array_equal(a.indices, b.indices)

    def test_invalid_batch_size(self):
        with pytest.raises(ConfigurationError):
            DataService.sample_batch(self.blank(3), 0, SamplerState.from_seed(0))

    def test_empty_dataset(self):
        with pytest.raises(DataError):
            DataService.sample_batch(self.blank(0), 2, SamplerState.from_seed(0))


class TestCorruption:

    def test_gaussian_moments(self):
        zeros = np.zeros((1, 1000, 1000, 1), dtype=np.float32)
        noisy = DataService.corrupt(zeros, NoiseSpec(kind='gaussian', magnitude=0.1), np.random.default_rng(0))
        assert 0.099 <= noisy.std() <= 0.101

    def test_salt_pepper_fraction(self):
        zeros = np.zeros((1, 1000, 1000, 1), dtype=np.float32)
        noisy = DataService.corrupt(zeros, NoiseSpec(kind='salt_pepper', magnitude=0.05), np.random.default_rng(0))
        fraction = np.mean(np.abs(noisy) == 1.0)
        assert 0.049 <= fraction <= 0.051

    def test_none_is_identity(self, rng):
        images = rng.uniform(-1, 1, size=(2, 8, 8, 3)).astype(np.float32)
        out = DataService.corrupt(images, NoiseSpec(kind='none', magnitude=0.3), rng)
        assert np.array_equal(out, images)

    def test_negative_magnitude_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            DataService.corrupt(np.zeros((1, 2, 2, 3)), NoiseSpec(kind='gaussian', magnitude=-0.1), rng)

    def test_batch_keeps_indices(self, rng):
        dataset = TestBatching.blank(4)
        batch = DataService.sample_batch(dataset, 2, SamplerState.from_seed(0))
        noisy = DataService.corrupt(batch, NoiseSpec(), rng)
        assert np.array_equal(noisy.indices, batch.indices)
        assert noisy.images.min() >= -1.0 and noisy.images.max() <= 1.0


class TestExperimentDomains:

    def test_resolve_domains_from_config(self, tiny_config):
        domain_x, domain_y = DataService.resolve_domains(tiny_config)
        assert len(domain_x) == len(domain_y) == 16
        assert domain_x.image_shape == (32, 32, 3)

    def test_folder_domains_need_paths(self, make_config):
        config = make_config(data={'synthetic': None})
        with pytest.raises(ConfigurationError):
            DataService.resolve_domains(config)
