"""Logging configuration for the lab."""
import functools
import json
import logging
import logging.handlers
import time
from contextvars import ContextVar
from datetime import datetime, timezone
from pathlib import Path

from rich.logging import RichHandler

from resgan.extensions import console

CONTEXT_KEYS = ('command', 'run_name', 'iteration')
MB = 1024 * 1024

# file name -> (level, max size in MB, backups, json?)
LOG_FILES = {
    'error.log': (logging.ERROR, 10, 10, False),
    'resgan.log': (logging.INFO, 20, 10, False),
    'resgan.json.log': (logging.INFO, 20, 5, True),
}

_run_context = ContextVar('resgan_run_context', default={})


def set_run_context(**values):
    """
    Stamp ``command`` / ``run_name`` / ``iteration`` (or clear them with None)
    on every log record emitted from this context.
    """
    context = dict(_run_context.get())
    for key, value in values.items():
        if value is None:
            context.pop(key, None)
        else:
            context[key] = value
    _run_context.set(context)


def _context_suffix(record):
    parts = [f'{key}={getattr(record, key)}' for key in CONTEXT_KEYS if hasattr(record, key)]
    return f" [{' '.join(parts)}]" if parts else ''


class RunContextFilter(logging.Filter):
    """Copy the current run context onto each record."""

    def filter(self, record):
        for key, value in _run_context.get().items():
            setattr(record, key, value)
        record.context = _context_suffix(record)
        return True


class JsonFormatter(logging.Formatter):
    """One JSON object per record, run context included."""

    def format(self, record):
        log_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'function': record.funcName,
            'line': record.lineno,
            'message': record.getMessage(),
        }
        log_data.update({key: getattr(record, key) for key in CONTEXT_KEYS if hasattr(record, key)})
        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)
        return json.dumps(log_data, default=str)


def _replace_handlers(logger, handlers):
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()
    for handler in handlers:
        logger.addHandler(handler)


def _rotating(path, level, max_mb, backups, formatter, context_filter=None):
    handler = logging.handlers.RotatingFileHandler(path, maxBytes=max_mb * MB, backupCount=backups)
    handler.setLevel(level)
    handler.setFormatter(formatter)
    if context_filter is not None:
        handler.addFilter(context_filter)
    return handler


def setup_logging(settings, log_level=None):
    """
    Configure lab logging from a settings class.

    Rich console on stderr (unless CONSOLE_LOGGING is off), rotating text
    and JSON files under LOG_DIR, and a separate performance log fed by
    ``log_performance``. Safe to call again; handlers are replaced.
    """
    log_dir = Path(settings.LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)
    level = getattr(logging, (log_level or settings.LOG_LEVEL).upper(), logging.INFO)

    text_formatter = logging.Formatter(
        '[%(asctime)s] %(levelname)s %(name)s:%(lineno)d%(context)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    context_filter = RunContextFilter()

    handlers = [
        _rotating(log_dir / name, file_level, max_mb, backups,
                  JsonFormatter() if as_json else text_formatter, context_filter)
        for name, (file_level, max_mb, backups, as_json) in LOG_FILES.items()
    ]
    if settings.CONSOLE_LOGGING:
        console_handler = RichHandler(console=console, show_path=False, rich_tracebacks=True)
        console_handler.setLevel(level)
        console_handler.addFilter(context_filter)
        handlers.append(console_handler)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    _replace_handlers(root_logger, handlers)

    performance_logger = logging.getLogger('performance')
    performance_logger.setLevel(logging.INFO)
    performance_logger.propagate = False
    _replace_handlers(performance_logger, [
        _rotating(log_dir / 'performance.log', logging.INFO, 10, 5, text_formatter, context_filter),
    ])

    for noisy in ('PIL', 'matplotlib', 'torch._dynamo'):
        logging.getLogger(noisy).setLevel(logging.WARNING)

    root_logger.debug(f'Logging configured - level: {logging.getLevelName(level)}, dir: {log_dir}')


def log_performance(threshold_ms=1000):
    """
    Decorator timing a call into the performance log.

    Args:
        threshold_ms: Calls slower than this are logged as warnings
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                duration_ms = (time.perf_counter() - start_time) * 1000
                logger = logging.getLogger('performance')
                message = f'{func.__qualname__} took {duration_ms:.1f}ms'
                if duration_ms > threshold_ms:
                    logger.warning(f'{message} (threshold: {threshold_ms}ms)')
                else:
                    logger.info(message)
        return wrapper
    return decorator
