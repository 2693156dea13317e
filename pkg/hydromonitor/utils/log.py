import logging
from typing import Optional

from hydromonitor.utils.config import LOG_LEVEL

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure the root hydromonitor logger once.

    Args:
        level: Level name; falls back to HYDROMONITOR_LOG_LEVEL.
    """
    resolved = (level or LOG_LEVEL).upper()
    logger = logging.getLogger("hydromonitor")
    logger.setLevel(resolved)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)


def progress_enabled() -> bool:
    # tqdm bars only make sense when INFO messages are shown
    return logging.getLogger("hydromonitor").getEffectiveLevel() <= logging.INFO
