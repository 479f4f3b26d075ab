"""Evaluation report files."""
import json
import logging
from pathlib import Path

from resgan.models.report import MetricReport
from resgan.utils.atomic import atomic_write_json

logger = logging.getLogger(__name__)


class ReportRepository:
    """Repository for evaluation reports: metric name -> MetricReport."""

    @staticmethod
    def save(path, reports, provenance=None):
        document = {
            'metrics': {name: report.to_dict() for name, report in sorted(reports.items())},
            'provenance': provenance or {},
        }
        atomic_write_json(path, document)
        logger.info(f"Wrote report with {len(reports)} metrics to {path}")
        return Path(path)

    @staticmethod
    def load(path):
        with open(path) as handle:
            document = json.load(handle)
        reports = {name: MetricReport.from_dict(data) for name, data in document['metrics'].items()}
        return reports, document.get('provenance', {})
