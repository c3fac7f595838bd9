#!/usr/bin/env python3
"""
Statistical Inference for Ordinal Functions

Error model sigma = c/sqrt(n) for window statistics, estimation of c from
stationary windows, the null bound for Delta^2, the window length needed for
a target accuracy and the exact binomial median (sign) test.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from exceptions import DomainError

logger = logging.getLogger(__name__)

# Rough standard deviation of Delta^2 under white noise is 7/n; the gate is twice that
DELTA_SQ_SIGMA_FACTOR = 7.0
DELTA_SQ_GATE_FACTOR = 15.0

LARGE_DELAY_RATIO = 0.05

ALTERNATIVES = ("greater", "less", "two-sided")


@dataclass(frozen=True)
class ErrorModel:
    """
    Standard deviation sigma = c/sqrt(n) of a window statistic.

    In the block model, n/k independent signs each repeated k times give c = k*sqrt(k).
    """

    c: float
    n: int

    @property
    def sigma(self) -> float:
        return self.c / math.sqrt(self.n)

    @property
    def k(self) -> float:
        return self.c ** (2.0 / 3.0)


@dataclass(frozen=True)
class MedianTestResult:
    positives: int
    trials: int
    p_value: float
    sided: str
    alternative: str
    dropped_zeros: int = 0
    dropped_missing: int = 0


def estimate_c(beta_samples: Sequence[float], n: int) -> ErrorModel:
    """
    Estimate c from values of one statistic over equal-length windows.

    Args:
        beta_samples: Values from non-overlapping, putatively stationary windows
        n: Window length

    Returns:
        ErrorModel with c = sample std * sqrt(n)
    """
    samples = np.asarray(beta_samples, dtype=np.float64)
    samples = samples[~np.isnan(samples)]
    if samples.size < 2:
        raise DomainError(f"Need at least 2 window values to estimate c, got {samples.size}")
    if n < 1:
        raise DomainError(f"Window length must be positive, got {n}")

    std = float(np.std(samples, ddof=1))
    model = ErrorModel(c=std * math.sqrt(n), n=int(n))
    logger.info(f"Estimated c={model.c:.3f} (k={model.k:.2f}) from {samples.size} windows of length {n}")
    return model


def estimate_c_per_delay(values: np.ndarray, n: int) -> pd.Series:
    """
    Estimate c separately for each delay row of a (delay x window) value matrix.

    Rows with fewer than two defined values give NaN.
    """
    values = np.asarray(values, dtype=np.float64)
    result = []
    for row in values:
        finite = row[~np.isnan(row)]
        result.append(float(np.std(finite, ddof=1)) * math.sqrt(n) if finite.size >= 2 else np.nan)
    return pd.Series(result, name="c")


def required_n(target_halfwidth: float, c: float) -> int:
    """
    Smallest window length n with 2c/sqrt(n) <= target_halfwidth.

    Example: halfwidth 0.01 with c = 2 needs n = 160000.
    """
    if not target_halfwidth > 0:
        raise DomainError(f"Target half-width must be positive, got {target_halfwidth}")
    if math.isinf(target_halfwidth):
        return 1

    exact = (2.0 * c / target_halfwidth) ** 2
    n = max(1, math.ceil(exact - 1e-9 * max(1.0, exact)))
    # guard the rounding tolerance above
    while 2.0 * c / math.sqrt(n) > target_halfwidth * (1 + 1e-12):
        n += 1
    return n


def median_test(signs: Sequence[float],
                sided: str = "two",
                alternative: Optional[str] = None) -> MedianTestResult:
    """
    Exact binomial sign test of the hypothesis that positive and negative are equally likely.

    Args:
        signs: Window values or +1/-1 signs; exact zeros and NaN are dropped and reported
        sided: "one" or "two"
        alternative: For one-sided tests, "greater" (default) or "less"

    Returns:
        MedianTestResult
    """
    if sided not in ("one", "two"):
        raise DomainError(f"sided must be 'one' or 'two', got {sided}")
    if sided == "two":
        alternative = "two-sided"
    elif alternative is None:
        alternative = "greater"
    elif alternative not in ALTERNATIVES[:2]:
        raise DomainError(f"Unknown one-sided alternative: {alternative}")

    values = np.asarray([_sign_value(s) for s in signs], dtype=np.float64)
    missing = np.isnan(values)
    if missing.any():
        logger.warning(f"Dropped {int(missing.sum())} missing values from the median test")
    values = values[~missing]
    if values.size == 0:
        raise DomainError("Median test needs at least one value")

    zeros = int(np.count_nonzero(values == 0))
    if zeros:
        logger.warning(f"Dropped {zeros} exact-zero values from the median test")

    positives = int(np.count_nonzero(values > 0))
    trials = int(np.count_nonzero(values != 0))
    if trials == 0:
        raise DomainError("Median test has no non-zero values")

    p_value = float(stats.binomtest(positives, trials, 0.5, alternative=alternative).pvalue)
    return MedianTestResult(positives=positives, trials=trials, p_value=min(1.0, p_value),
                            sided=sided, alternative=alternative, dropped_zeros=zeros,
                            dropped_missing=int(missing.sum()))


def _sign_value(s) -> float:
    if isinstance(s, str):
        token = s.strip()
        if token in ("+", "+1"):
            return 1.0
        if token in ("-", "-1"):
            return -1.0
        return float(token)
    return float(s)


def delta_sq_null_bound(n: int):
    """
    Standard deviation and gate of Delta^2 under white noise for window length n.

    Returns:
        (7/n, 15/n)
    """
    if n < 3:
        raise DomainError(f"Window length must be at least 3, got {n}")
    return DELTA_SQ_SIGMA_FACTOR / n, DELTA_SQ_GATE_FACTOR / n


def large_delay_warning(d: int, n: int) -> Optional[str]:
    """Return a warning message when d/n is large enough for the d/n error term to matter."""
    if d / n > LARGE_DELAY_RATIO:
        message = (f"Delay {d} is {d / n:.1%} of the window length {n}; "
                   f"expect an additional error of order d/n")
        logger.warning(message)
        return message
    return None
