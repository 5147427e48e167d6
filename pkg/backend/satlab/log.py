# backend/satlab/log.py

import logging
import sys

LOG_FORMAT = "%(levelname)s:%(name)s:%(message)s"


def configure_logging(level: str | int = logging.WARNING) -> None:
    """
    Send satlab logs to stderr so stdout and --out files stay reproducible.
    Safe to call more than once; the handler is replaced, not stacked.
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    logger = logging.getLogger("satlab")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
