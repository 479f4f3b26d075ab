"""Run directory layout: run/<name>/{config.json, checkpoints/, logs/metrics.jsonl, samples/}."""
import json
import logging
from pathlib import Path

from resgan.utils.atomic import atomic_write_json, atomic_write_text
from resgan.utils.checksums import canonical_json

logger = logging.getLogger(__name__)

CONFIG_FILE = 'config.json'
METRICS_FILE = 'metrics.jsonl'


class RunRepository:
    """Repository for the files of one training run."""

    @staticmethod
    def run_dir(runs_root, name):
        return Path(runs_root) / name

    @staticmethod
    def create(run_dir):
        run_dir = Path(run_dir)
        for sub in ('checkpoints', 'logs', 'samples'):
            (run_dir / sub).mkdir(parents=True, exist_ok=True)
        return run_dir

    @staticmethod
    def write_config(run_dir, document, hashes=None):
        """Persist the resolved config (plus provenance hashes) next to the run."""
        atomic_write_json(Path(run_dir) / CONFIG_FILE, document)
        if hashes:
            atomic_write_json(Path(run_dir) / 'hashes.json', hashes)

    @staticmethod
    def read_config(run_dir):
        with open(Path(run_dir) / CONFIG_FILE) as handle:
            return json.load(handle)

    @staticmethod
    def checkpoint_path(run_dir, iteration, prefix='iter'):
        return Path(run_dir) / 'checkpoints' / f'{prefix}_{iteration}.ckpt'

    @staticmethod
    def sample_path(run_dir, iteration):
        return Path(run_dir) / 'samples' / f'iter_{iteration}.png'

    @staticmethod
    def metrics_path(run_dir):
        return Path(run_dir) / 'logs' / METRICS_FILE

    @staticmethod
    def reset_metrics(run_dir):
        atomic_write_text(RunRepository.metrics_path(run_dir), '')

    @staticmethod
    def truncate_metrics(run_dir, iteration):
        """Drop records past ``iteration`` (a resumed run rewrites them)."""
        kept = [r for r in RunRepository.read_metrics(run_dir) if r['iteration'] <= iteration]
        atomic_write_text(
            RunRepository.metrics_path(run_dir),
            ''.join(canonical_json(record).decode('utf-8') + '\n' for record in kept),
        )

    @staticmethod
    def append_metrics(run_dir, record):
        with open(RunRepository.metrics_path(run_dir), 'a') as handle:
            handle.write(canonical_json(record).decode('utf-8') + '\n')
            handle.flush()

    @staticmethod
    def read_metrics(run_dir):
        path = RunRepository.metrics_path(run_dir)
        if not path.exists():
            return []
        with open(path) as handle:
            return [json.loads(line) for line in handle if line.strip()]

    @staticmethod
    def latest_checkpoint(run_dir):
        """Highest-iteration ``iter_<k>.ckpt`` of a run, or None."""
        candidates = []
        for path in (Path(run_dir) / 'checkpoints').glob('iter_*.ckpt'):
            suffix = path.stem[len('iter_'):]
            if suffix.isdigit():
                candidates.append((int(suffix), path))
        return max(candidates)[1] if candidates else None
