"""Logging setup.

Library modules log through ``logging.getLogger(__name__)``; the CLI attaches a
Rich handler on the error console so that records never mix with verdicts.
"""

import logging

from rich.logging import RichHandler

from tpnv.utils import error_console

_HANDLER_NAME = "tpnv-rich"


def configure_logging(level: str | int = logging.WARNING) -> None:
    """Attach a single Rich handler to the ``tpnv`` logger.

    Calling this again only updates the level.

    Args:
        level: Logging level name or number.
    """
    logger = logging.getLogger("tpnv")
    logger.setLevel(level)
    if any(h.get_name() == _HANDLER_NAME for h in logger.handlers):
        return
    handler = RichHandler(
        console=error_console,
        show_path=False,
        rich_tracebacks=True,
        markup=False,
    )
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.propagate = False


def verbosity_level(verbose: int, default: str) -> str:
    """Map a repeated ``--verbose`` count onto a level name."""
    if verbose >= 2:
        return "DEBUG"
    if verbose == 1:
        return "INFO"
    return default
