#!/usr/bin/env python3
"""
Configuration for the ordinal scan command line.

Settings come from an optional key=value file, then ORDINAL_SCAN_* environment
variables (a .env file is honoured), then the defaults below. Command line
flags override all of them.
"""

import os
import logging
from dataclasses import dataclass, fields, replace
from typing import Dict, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from exceptions import DomainError

logger = logging.getLogger(__name__)

ENV_PREFIX = "ORDINAL_SCAN_"


@dataclass(frozen=True)
class ScanConfig:
    window: int = 1000
    step: Optional[int] = None
    delay_min: int = 1
    delay_max: int = 50
    gate: Optional[float] = None
    boundary_mode: str = "linear"
    cumsum: bool = False
    missing_policy: str = "propagate"
    series_format: str = "csv_single_column"
    missing_token: str = "NaN"
    map_format: str = "csv_matrix"
    value_range: Tuple[float, float] = (-1.0, 1.0)
    threads: Optional[int] = None
    seed: int = 0
    log_file: str = "ordinal_scan.log"
    log_level: str = "INFO"

    @property
    def effective_step(self) -> int:
        return self.step if self.step is not None else self.window

    def override(self, **values) -> "ScanConfig":
        """Return a copy with every non-None value replaced."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})


def _convert(name: str, raw: str):
    field_types = {f.name: f.type for f in fields(ScanConfig)}
    kind = str(field_types[name])
    raw = raw.strip()
    try:
        if name == "value_range":
            lo, hi = (float(part) for part in raw.replace(",", " ").split())
            return lo, hi
        if name == "cumsum":
            return raw.lower() in ("1", "true", "yes", "on")
        if raw == "" and "Optional" in kind:
            return None
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise DomainError(f"Invalid value for {name}: {raw!r}")
    return raw


def load_config(path: Optional[str] = None) -> ScanConfig:
    """
    Load the scan configuration.

    Args:
        path: Optional key=value file; keys are ScanConfig field names

    Returns:
        ScanConfig with file values over environment values over defaults
    """
    load_dotenv()
    known = {f.name for f in fields(ScanConfig)}
    settings: Dict[str, object] = {}

    for name in known:
        env_value = os.environ.get(ENV_PREFIX + name.upper())
        if env_value is not None:
            settings[name] = _convert(name, env_value)

    if path:
        if not os.path.exists(path):
            raise DomainError(f"Config file not found: {path}")
        for key, value in dotenv_values(path).items():
            name = key.strip().lower().replace("-", "_")
            if name not in known:
                logger.warning(f"Ignoring unknown config key {key!r} in {path}")
                continue
            settings[name] = _convert(name, value or "")
        logger.info(f"Loaded configuration from {path}")

    return ScanConfig(**settings)
