"""
Runtime settings.

Defaults live in the Settings dataclass. A `.env` file in the working
directory is loaded first, then the SELBERG_LAB_* environment variables
override the defaults.
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from .errors import SchemaError

logger = logging.getLogger(__name__)

BUDGET_ENV = "SELBERG_LAB_BUDGET"
LOG_LEVEL_ENV = "SELBERG_LAB_LOG_LEVEL"


@dataclass(frozen=True)
class Settings:
    """
    Numerical tolerances and resource limits shared by all modules.

    Attributes:
        word_budget (int): Maximum number of words a single enumeration may visit
        trace_tol (float): Tolerance on traces and determinants
        length_tol (float): Clustering tolerance for geodesic lengths
        relator_tol (float): Entrywise tolerance for relator checks
        saturation_exponent (float): Exponents above this saturate ExtendedLog
        zeta_tail_margin (float): Minimum s - 1 for the primitive tail bound
        conjugator_depth (int): Word depth of conjugators used to merge classes
        log_level (str): Logging level name for the command line
    """

    word_budget: int = 10_000_000
    trace_tol: float = 1e-12
    length_tol: float = 1e-9
    relator_tol: float = 1e-9
    saturation_exponent: float = 700.0
    zeta_tail_margin: float = 1e-6
    conjugator_depth: int = 2
    log_level: str = "WARNING"


_cached: Optional[Settings] = None


def _parse_budget(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise SchemaError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise SchemaError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    return value


def load_settings(refresh: bool = False) -> Settings:
    """
    Load settings from `.env` and the environment.

    Args:
        refresh (bool): Re-read the environment instead of using the cached value

    Returns:
        Settings: Effective settings
    """
    global _cached
    if _cached is not None and not refresh:
        return _cached

    load_dotenv()
    settings = Settings()

    raw_budget = os.environ.get(BUDGET_ENV)
    if raw_budget:
        settings = replace(settings, word_budget=_parse_budget(raw_budget))
        logger.debug("word budget overridden to %d", settings.word_budget)

    raw_level = os.environ.get(LOG_LEVEL_ENV)
    if raw_level:
        settings = replace(settings, log_level=raw_level.upper())

    _cached = settings
    return settings
