"""Entry point: ``python run.py <command> ...``."""
from resgan.cli import cli

if __name__ == '__main__':
    cli()
