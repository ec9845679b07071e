"""
Module for logging configuration, including a function to configure logging,
the path to the default log directory, and the package-wide fallback logger.
"""

import logging
import os
from typing import Optional

LOG_PATH = os.path.dirname(os.path.abspath(__file__)) + "/log/"

PACKAGE_LOGGER_NAME = "martspec"

LOG_FORMAT = "%(levelname)s [%(filename)s(%(lineno)s):%(funcName)s] %(message)s"


def configure_logging(
    log_path: str = LOG_PATH,
    filename: str = "martspec.log",
    level: int = logging.ERROR,
) -> logging.Logger:
    """
    Configure logging to write to a file and/or stderr, and return a logger
    object. An empty filename sends the output to stderr only.
    """
    logger = logging.getLogger(f"{PACKAGE_LOGGER_NAME}.{filename or 'stream'}")
    logger.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)
    # repeated configuration (one call per CLI verb) must not stack handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    if len(filename) == 0:
        sh = logging.StreamHandler()
        sh.setFormatter(formatter)
        logger.addHandler(sh)
        return logger
    if not os.path.exists(log_path):
        os.makedirs(log_path)
    fh = logging.FileHandler(os.path.join(log_path, filename), mode="w")
    fh.setFormatter(formatter)
    logger.addHandler(fh)
    return logger


def get_logger(logger: Optional[logging.Logger] = None) -> logging.Logger:
    """Return the given logger, or the package logger when none is given."""
    if logger is not None:
        return logger
    return logging.getLogger(PACKAGE_LOGGER_NAME)
