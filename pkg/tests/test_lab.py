"""Lab factory and logging setup."""
import json
import logging

import pytest

from config import TestingConfig, config_by_name
from resgan import create_lab
from resgan.enums import ErrorCategory
from resgan.exceptions import ConfigurationError, DependencyError, LabError
from resgan.logging_config import log_performance, set_run_context, setup_logging


@pytest.fixture
def settings(tmp_path):
    return type('Settings', (TestingConfig,), {'LOG_DIR': str(tmp_path / 'logs')})


def flush():
    for logger in (logging.getLogger(), logging.getLogger('performance')):
        for handler in logger.handlers:
            handler.flush()


class TestLab:

    def test_testing_environment(self):
        lab = create_lab('testing')
        assert lab.env == 'testing'
        assert lab.experiment_defaults['image_size'] == 32
        assert lab.runs_root == TestingConfig.RUNS_ROOT

    def test_unknown_environment(self):
        with pytest.raises(ConfigurationError):
            create_lab('staging')

    def test_every_environment_is_registered(self):
        assert {'development', 'production', 'testing', 'default'} <= set(config_by_name)

    def test_error_categories_map_to_exit_codes(self):
        assert ConfigurationError('x').category is ErrorCategory.CONFIGURATION
        assert ErrorCategory.CONFIGURATION.exit_code == 2
        assert DependencyError('x').to_dict()['category'] == 'dependency'
        assert len({c.exit_code for c in ErrorCategory}) == len(ErrorCategory)
        assert issubclass(DependencyError, LabError)


class TestLogging:

    def test_json_log_carries_run_context(self, settings, tmp_path):
        setup_logging(settings)
        set_run_context(run_name='tiny', iteration=3)
        try:
            logging.getLogger('resgan.test').info('step done')
        finally:
            set_run_context(run_name=None, iteration=None)
        flush()
        lines = (tmp_path / 'logs' / 'resgan.json.log').read_text().strip().splitlines()
        record = json.loads(lines[-1])
        assert record['message'] == 'step done'
        assert record['run_name'] == 'tiny'
        assert record['iteration'] == 3

    def test_errors_go_to_the_error_log(self, settings, tmp_path):
        setup_logging(settings)
        logging.getLogger('resgan.test').error('went wrong')
        flush()
        assert 'went wrong' in (tmp_path / 'logs' / 'error.log').read_text()

    def test_performance_log(self, settings, tmp_path):
        setup_logging(settings)

        @log_performance(threshold_ms=60000)
        def quick():
            return 7

        assert quick() == 7
        flush()
        assert 'quick took' in (tmp_path / 'logs' / 'performance.log').read_text()
