import logging
import sys
from typing import Optional
from core.config import settings


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: Optional[str] = None):
    """
    Configures the root logger with a single stream handler. Calling it again
    only changes the level and points the handler at the current stderr.
    """
    root = logging.getLogger()
    level = (level or settings.OCT_LOG_LEVEL).upper()
    root.setLevel(level)
    for handler in root.handlers:
        if getattr(handler, "_oct_handler", False):
            handler.stream = sys.stderr
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._oct_handler = True
    root.addHandler(handler)
