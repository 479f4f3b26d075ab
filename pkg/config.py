import os
import tempfile
from dotenv import load_dotenv

load_dotenv()

class Config:
    """Base configuration."""
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_DIR = os.getenv('LOG_DIR', 'logs')
    CONSOLE_LOGGING = True

    # Runs are written under RUNS_ROOT/<name>/
    RUNS_ROOT = os.getenv('RUNS_ROOT', 'run')

    # Compute
    DEVICE = os.getenv('RESGAN_DEVICE', 'cpu')
    DETERMINISTIC = os.getenv('RESGAN_DETERMINISTIC', '1') == '1'
    NUM_THREADS = int(os.getenv('RESGAN_NUM_THREADS', 1))

    # Partial experiment document merged under every config file
    EXPERIMENT_DEFAULTS = {}

class DevelopmentConfig(Config):
    """Desk-scale configuration: 32x32 images, narrowed networks."""
    EXPERIMENT_DEFAULTS = {
        'image_size': 32,
        'feature_dim': 64,
        'widths': {'generator_base': 32, 'discriminator_base': 32, 'encoder_base': 16},
        'batch_size': 64,
        'iterations': 10000,
    }

class ProductionConfig(Config):
    """Full-scale configuration: 64x64 images, DCGAN widths, 35k iterations."""
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    NUM_THREADS = int(os.getenv('RESGAN_NUM_THREADS', os.cpu_count() or 1))
    EXPERIMENT_DEFAULTS = {
        'image_size': 64,
        'feature_dim': 256,
        'widths': {'generator_base': 64, 'discriminator_base': 64, 'encoder_base': 32},
        'batch_size': 64,
        'iterations': 35000,
        'log_every': 500,
        'checkpoint_every': 5000,
        'sample_every': 5000,
    }

class TestingConfig(Config):
    """Testing configuration: tiny networks, logs in a temp dir."""
    LOG_LEVEL = 'DEBUG'
    LOG_DIR = os.path.join(tempfile.gettempdir(), 'resgan-test-logs')
    CONSOLE_LOGGING = False
    RUNS_ROOT = os.path.join(tempfile.gettempdir(), 'resgan-test-runs')
    DETERMINISTIC = True
    EXPERIMENT_DEFAULTS = {
        'image_size': 32,
        'feature_dim': 16,
        'latent': {'z_dim': 8},
        'widths': {'generator_base': 8, 'discriminator_base': 8, 'encoder_base': 4},
        'batch_size': 4,
        'iterations': 2,
        'log_every': 1,
        'checkpoint_every': 1,
        'sample_every': 1,
        'diagnostic_samples': 8,
        'autoencoder': {'steps': 2, 'batch_size': 4},
        'mapper': {'steps': 2, 'batch_size': 4, 'hidden': 16},
        'evaluation': {'n_samples': 8, 'n_pairs': 20, 'n_repeats': 2},
    }

config_by_name = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
