#!/usr/bin/env python3
"""
Signal Models

Seedable generators for the synthetic processes used to validate the ordinal
functions (white noise, AR2, Brownian motion, periodic waveforms) and the
disturbances applied to them (additive noise, outliers, a slow trend and a
monotone transformation).

Random numbers come from numpy's PCG64 bit generator (``np.random.default_rng``);
Gaussian variates use its ziggurat ``standard_normal``. Both are stable across
platforms for a given numpy release, so seeds reproduce series bit for bit.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy import signal

from exceptions import DomainError
from pattern_counter import SeriesLike, TimeSeries, as_values

logger = logging.getLogger(__name__)

GENERATOR_KINDS = ("white_noise", "ar2", "brownian", "periodic", "from_series")
DISTURBANCE_KINDS = ("additive_white_noise", "outliers", "low_freq", "monotone_transform")
WAVEFORMS = ("sine", "sawtooth")
EXP_LIMIT = float(np.log(np.finfo(np.float64).max))

AR2_BURN_IN = 1000

# The oscillating AR2 model used throughout the validation experiments
DEFAULT_AR2 = {"a1": 1.85, "a2": -0.96}


def ar2_is_stationary(a1: float, a2: float) -> bool:
    """True if all roots of 1 - a1 z - a2 z^2 lie outside the unit circle."""
    if a2 == 0:
        return abs(a1) < 1
    roots = np.roots([-a2, -a1, 1.0])
    return bool(np.all(np.abs(roots) > 1.0))


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Parameters of a synthetic process.

    Args:
        kind: One of white_noise, ar2, brownian, periodic, from_series
        length: Number of samples T
        seed: Seed for the PCG64 generator
        params: Kind-specific parameters
            ar2: a1, a2, noise_std
            white_noise / brownian: noise_std
            periodic: period, waveform ("sine" or "sawtooth"), phase, amplitude
            from_series: values
    """

    kind: str
    length: int
    seed: int = 0
    params: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DomainError(f"Unknown generator kind: {self.kind}")
        if self.length < 1:
            raise DomainError(f"Series length must be at least 1, got {self.length}")
        if self.kind == "ar2":
            a1 = self.params.get("a1", DEFAULT_AR2["a1"])
            a2 = self.params.get("a2", DEFAULT_AR2["a2"])
            if not ar2_is_stationary(a1, a2):
                raise DomainError(f"AR2 coefficients a1={a1}, a2={a2} are not stationary")
        if self.kind == "periodic":
            if int(self.params.get("period", 0)) < 2:
                raise DomainError("Periodic generator needs an integer period >= 2")
            if self.params.get("waveform", "sine") not in WAVEFORMS:
                raise DomainError(f"Unknown waveform: {self.params.get('waveform')}")
        if self.kind == "from_series" and "values" not in self.params:
            raise DomainError("from_series generator needs 'values'")


@dataclass(frozen=True)
class DisturbanceSpec:
    """
    A disturbance applied to an existing series.

    Args:
        kind: additive_white_noise, outliers, low_freq or monotone_transform
        seed: Seed for the PCG64 generator
        snr: Signal-to-noise variance ratio (additive_white_noise)
        fraction: Fraction of positions replaced (outliers)
        amplitude_in_sigmas: Outlier magnitude in units of std(x) (outliers)
        period_scale: t is divided by this inside sin (low_freq)
        amplitude: Amplitude of the added sine (low_freq)
        scale: y = exp(x/scale) (monotone_transform)
    """

    kind: str
    seed: int = 0
    snr: float = 1.0
    fraction: float = 0.01
    amplitude_in_sigmas: float = 20.0
    period_scale: float = 300.0
    amplitude: float = 1.0
    scale: float = 7.0

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise DomainError(f"Unknown disturbance kind: {self.kind}")
        if self.kind == "additive_white_noise" and not self.snr > 0:
            raise DomainError(f"SNR must be positive, got {self.snr}")
        if self.kind == "outliers" and not 0 < self.fraction < 1:
            raise DomainError(f"Outlier fraction must lie in (0, 1), got {self.fraction}")
        if self.kind == "low_freq" and not self.period_scale > 0:
            raise DomainError(f"period_scale must be positive, got {self.period_scale}")
        if self.kind == "monotone_transform" and not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


class SignalGenerator:
    """
    A stateful generator bound to one GeneratorSpec.

    Each instance owns its own PCG64 stream; use one instance per worker.
    """

    def __init__(self, spec: GeneratorSpec):
        """
        Initialize the SignalGenerator.

        Args:
            spec: Process to generate
        """
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        logger.info(f"Initialized SignalGenerator for {spec.kind} (T={spec.length}, seed={spec.seed})")

    def generate(self) -> TimeSeries:
        """Draw one series according to the spec."""
        builders = {
            "white_noise": self._white_noise,
            "ar2": self._ar2,
            "brownian": self._brownian,
            "periodic": self._periodic,
            "from_series": self._from_series,
        }
        values = builders[self.spec.kind]()
        return TimeSeries(values, sample_rate_hz=self.spec.params.get("sample_rate_hz"))

    def _white_noise(self) -> np.ndarray:
        return self.spec.params.get("noise_std", 1.0) * self.rng.standard_normal(self.spec.length)

    def _ar2(self) -> np.ndarray:
        a1 = self.spec.params.get("a1", DEFAULT_AR2["a1"])
        a2 = self.spec.params.get("a2", DEFAULT_AR2["a2"])
        noise_std = self.spec.params.get("noise_std", 1.0)

        noise = noise_std * self.rng.standard_normal(self.spec.length + AR2_BURN_IN)
        # X_t = a1 X_{t-1} + a2 X_{t-2} + W_t
        values = signal.lfilter([1.0], [1.0, -a1, -a2], noise)
        return values[AR2_BURN_IN:]

    def _brownian(self) -> np.ndarray:
        return np.cumsum(self._white_noise())

    def _periodic(self) -> np.ndarray:
        period = int(self.spec.params["period"])
        phase = self.spec.params.get("phase", 0.0)
        amplitude = self.spec.params.get("amplitude", 1.0)

        t = np.arange(period)
        if self.spec.params.get("waveform", "sine") == "sine":
            one_period = amplitude * np.sin(2.0 * np.pi * t / period + phase)
        else:
            one_period = amplitude * (((t / period + phase / (2.0 * np.pi)) % 1.0) * 2.0 - 1.0)

        # tile one period so x_{t+L} == x_t exactly
        reps = -(-self.spec.length // period)
        return np.tile(one_period, reps)[:self.spec.length]

    def _from_series(self) -> np.ndarray:
        values = as_values(self.spec.params["values"])
        return values[:self.spec.length].copy()


def generate(spec: GeneratorSpec) -> TimeSeries:
    """Generate the series described by spec; identical specs give identical output."""
    return SignalGenerator(spec).generate()


def disturb(x: SeriesLike, spec: DisturbanceSpec) -> TimeSeries:
    """
    Apply one disturbance to a series.

    additive_white_noise adds Gaussian noise with var(x)/var(noise) = snr;
    outliers replaces round(fraction*T) uniformly chosen positions by
    mean(x) +/- amplitude_in_sigmas*std(x) with random sign; low_freq adds
    amplitude*sin(t/period_scale); monotone_transform maps x to exp(x/scale).
    """
    sample_rate = x.sample_rate_hz if isinstance(x, TimeSeries) else None
    values = as_values(x).copy()
    rng = np.random.default_rng(spec.seed)
    T = values.size

    if spec.kind == "additive_white_noise":
        noise_std = float(np.nanstd(values)) / math.sqrt(spec.snr)
        values = values + noise_std * rng.standard_normal(T)

    elif spec.kind == "outliers":
        count = int(round(spec.fraction * T))
        positions = rng.choice(T, size=count, replace=False)
        signs = rng.choice([-1.0, 1.0], size=count)
        spike = spec.amplitude_in_sigmas * float(np.nanstd(values))
        values[positions] = float(np.nanmean(values)) + signs * spike
        logger.info(f"Inserted {count} outliers of magnitude {spike:.3g}")

    elif spec.kind == "low_freq":
        values = values + spec.amplitude * np.sin(np.arange(T) / spec.period_scale)

    else:
        peak = float(np.nanmax(values)) / spec.scale if T else 0.0
        if peak > EXP_LIMIT:
            raise DomainError(f"exp(x/scale) overflows for scale={spec.scale:g}: max(x)/scale is "
                              f"{peak:.4g}, above {EXP_LIMIT:.4g}; use a larger scale")
        values = np.exp(values / spec.scale)

    return TimeSeries(values, sample_rate_hz=sample_rate)


def ar2_autocorrelation(a1: float, a2: float, max_lag: int) -> np.ndarray:
    """
    Theoretical autocorrelation rho(0..max_lag) of a stationary AR2 process.

    rho(1) = a1/(1-a2) from the Yule-Walker equations, then
    rho(k) = a1 rho(k-1) + a2 rho(k-2).
    """
    if not ar2_is_stationary(a1, a2):
        raise DomainError(f"AR2 coefficients a1={a1}, a2={a2} are not stationary")
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    if max_lag >= 1:
        rho[1] = a1 / (1.0 - a2)
    for k in range(2, max_lag + 1):
        rho[k] = a1 * rho[k - 1] + a2 * rho[k - 2]
    return rho


def ar2_variance(a1: float, a2: float, noise_std: float = 1.0) -> float:
    """Stationary variance of the AR2 process with innovation std noise_std."""
    if not ar2_is_stationary(a1, a2):
        raise DomainError(f"AR2 coefficients a1={a1}, a2={a2} are not stationary")
    return ((1.0 - a2) * noise_std ** 2
            / ((1.0 + a2) * ((1.0 - a2) ** 2 - a1 ** 2)))
