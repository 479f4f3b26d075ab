"""Command decorators."""
import json
import logging
import sys
from functools import wraps

import click

from resgan.enums import ErrorCategory
from resgan.exceptions import LabError
from resgan.logging_config import set_run_context

logger = logging.getLogger(__name__)


def _emit_error(category, message):
    click.echo(json.dumps({'error': {'category': category.value, 'message': message}}), err=True)


def handle_cli_errors(fn):
    """
    Turn exceptions into one JSON line on stderr plus the category's exit code.

    LabErrors exit with their own category; anything else is logged with its
    traceback and exits as ``internal``.
    """
    @wraps(fn)
    def wrapper(*args, **kwargs):
        set_run_context(command=fn.__name__)
        try:
            return fn(*args, **kwargs)
        except LabError as e:
            logger.error(f'{fn.__name__} failed ({e.category.value}): {e}')
            _emit_error(e.category, str(e))
            sys.exit(e.category.exit_code)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception as e:
            logger.error(f'{fn.__name__} failed unexpectedly: {e}', exc_info=True)
            _emit_error(ErrorCategory.INTERNAL, f'{type(e).__name__}: {e}')
            sys.exit(ErrorCategory.INTERNAL.exit_code)
        finally:
            set_run_context(command=None)
    return wrapper
