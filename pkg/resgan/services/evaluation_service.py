"""Evaluation reports for checkpoints and image directories."""
import logging

from resgan.enums import MetricName
from resgan.exceptions import ConfigurationError, LabError
from resgan.logging_config import log_performance
from resgan.models.features import FeatureStats
from resgan.models.report import MetricReport
from resgan.services.attribute_service import AttributeService
from resgan.services.data_service import DataService
from resgan.services.feature_service import FeatureService
from resgan.services.inference_service import InferenceService
from resgan.services.metric_service import EncoderExtractor, IdentityExtractor, MetricService
from resgan.utils.checksums import config_hash

logger = logging.getLogger(__name__)


def _check_metrics(metrics):
    unknown = [m for m in metrics if not MetricName.is_valid(m)]
    if unknown:
        raise ConfigurationError(
            f"Unknown metrics: {', '.join(unknown)}. Must be among: {', '.join(MetricName.values())}"
        )
    return list(metrics)


def extractor_for(encoder=None, ae_hash=None):
    return EncoderExtractor(encoder, ae_hash) if encoder is not None else IdentityExtractor()


class EvaluationService:
    """Service assembling MetricReports."""

    @staticmethod
    @log_performance(threshold_ms=120000)
    def evaluate_checkpoint(state, metrics=None, real_x=None, real_y=None, seed=None):
        """
        Generate ``evaluation.n_samples`` pairs from a restored state and score them.

        Args:
            state: TrainingState from CheckpointService.load_checkpoint
            metrics: Metric names; defaults to ``config.evaluation.metrics``
            real_x, real_y: Optional real domains for feature_fid and the
                real-data MS-SSIM baseline
            seed: Sampling seed; defaults to the experiment seed

        Returns:
            dict report key -> MetricReport
        """
        config = state.config
        settings = config.evaluation
        metrics = _check_metrics(metrics or settings.metrics)
        seed = config.seed if seed is None else seed
        run_hash = config_hash(config)
        encoder = state.bundle.encoder

        grid = InferenceService.sample_pairs(state, settings.n_samples, seed)
        fakes = {'x': grid.images_x, 'y': grid.images_y}
        reals = {'x': real_x, 'y': real_y}
        reports = {}

        if MetricName.MS_SSIM.value in metrics:
            for side, images in fakes.items():
                reports[f'ms_ssim.{side}'] = MetricService.mean_pairwise_ms_ssim(
                    images, settings.n_pairs, seed, settings.n_repeats, run_hash)
                if reals[side] is not None:
                    reports[f'ms_ssim.real_{side}'] = MetricService.mean_pairwise_ms_ssim(
                        reals[side].images, settings.n_pairs, seed, settings.n_repeats, run_hash)

        if MetricName.FEATURE_FID.value in metrics:
            if real_x is None or real_y is None:
                logger.warning("Skipping feature_fid: no real domains given")
            else:
                extractor = extractor_for(encoder, state.ae_hash)
                for side, images in fakes.items():
                    reports[f'feature_fid.{side}'] = MetricService.feature_fid(
                        extractor, reals[side].images, images, settings.fid_repeats, seed, run_hash)

        if MetricName.COVARIANCE_DISTANCE.value in metrics:
            if encoder is None:
                logger.warning("Skipping covariance_distance: checkpoint has no encoder")
            else:
                stats_x = FeatureStats.from_features(FeatureService.encode(encoder, grid.images_x))
                stats_y = FeatureStats.from_features(FeatureService.encode(encoder, grid.images_y))
                reports['covariance_distance'] = MetricReport.single(
                    MetricName.COVARIANCE_DISTANCE.value,
                    MetricService.covariance_distance(stats_x, stats_y),
                    sample_counts={'pairs': len(grid)},
                    config_hash=run_hash,
                    extractor_id=extractor_for(encoder, state.ae_hash).extractor_id,
                )

        if MetricName.ATTRIBUTE_CORRELATION.value in metrics:
            try:
                correlations = AttributeService.attribute_correlation(grid.images_x, grid.images_y, run_hash)
            except LabError as e:
                logger.warning(f"Skipping attribute_correlation: {e}")
            else:
                reports.update({f'attribute_correlation.{name}': r for name, r in correlations.items()})

        logger.info(f"Evaluated checkpoint at iteration {state.iteration}: {sorted(reports)}")
        return reports

    @staticmethod
    def evaluate_directories(dir_a, dir_b, image_size, metrics=None, encoder=None, ae_hash=None,
                             n_pairs=1000, n_repeats=1, seed=0):
        """
        Compare two image directories.

        feature_fid uses the frozen encoder when given, raw pixels
        otherwise; ms_ssim reports each directory's diversity.
        """
        metrics = _check_metrics(metrics or [MetricName.FEATURE_FID.value])
        set_a = DataService.load_image_domain(dir_a, image_size, domain_id='a')
        set_b = DataService.load_image_domain(dir_b, image_size, domain_id='b')
        reports = {}

        if MetricName.FEATURE_FID.value in metrics:
            reports['feature_fid'] = MetricService.feature_fid(
                extractor_for(encoder, ae_hash), set_a.images, set_b.images, n_repeats, seed)
        if MetricName.MS_SSIM.value in metrics:
            reports['ms_ssim.a'] = MetricService.mean_pairwise_ms_ssim(set_a.images, n_pairs, seed, n_repeats)
            reports['ms_ssim.b'] = MetricService.mean_pairwise_ms_ssim(set_b.images, n_pairs, seed, n_repeats)
        if MetricName.ATTRIBUTE_CORRELATION.value in metrics:
            if len(set_a) != len(set_b):
                raise ConfigurationError("attribute_correlation needs directories of paired images")
            correlations = AttributeService.attribute_correlation(set_a.images, set_b.images)
            reports.update({f'attribute_correlation.{name}': r for name, r in correlations.items()})
        if MetricName.COVARIANCE_DISTANCE.value in metrics:
            if encoder is None:
                raise ConfigurationError("covariance_distance needs an autoencoder")
            stats_a = FeatureStats.from_features(FeatureService.encode(encoder, set_a))
            stats_b = FeatureStats.from_features(FeatureService.encode(encoder, set_b))
            reports['covariance_distance'] = MetricReport.single(
                MetricName.COVARIANCE_DISTANCE.value,
                MetricService.covariance_distance(stats_a, stats_b),
                sample_counts={'a': len(set_a), 'b': len(set_b)},
                extractor_id=extractor_for(encoder, ae_hash).extractor_id,
            )
        return reports
