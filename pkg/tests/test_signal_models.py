#!/usr/bin/env python3
"""
Unit tests for the synthetic generators and disturbances.
"""

import os
import sys
import unittest

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from exceptions import DomainError
from ordinal_functions import autocorr
from pattern_counter import count_patterns3
from signal_models import (DEFAULT_AR2, DisturbanceSpec, GeneratorSpec, SignalGenerator,
                           ar2_autocorrelation, ar2_is_stationary, ar2_variance,
                           disturb, generate)


class TestGeneratorSpec(unittest.TestCase):
    """Tests for generator validation"""

    def test_stationarity(self):
        self.assertTrue(ar2_is_stationary(1.85, -0.96))
        self.assertFalse(ar2_is_stationary(1.0, 0.5))
        self.assertFalse(ar2_is_stationary(1.5, 0.0))

    def test_invalid_specs(self):
        with self.assertRaises(DomainError):
            GeneratorSpec("ar2", 100, params={"a1": 1.0, "a2": 0.5})
        with self.assertRaises(DomainError):
            GeneratorSpec("pink_noise", 100)
        with self.assertRaises(DomainError):
            GeneratorSpec("white_noise", 0)
        with self.assertRaises(DomainError):
            GeneratorSpec("periodic", 100, params={"period": 1})
        with self.assertRaises(DomainError):
            GeneratorSpec("from_series", 10)


class TestGenerate(unittest.TestCase):
    """Tests for the generators"""

    def test_reproducible(self):
        for kind in ("white_noise", "ar2", "brownian"):
            spec = GeneratorSpec(kind, 1000, seed=42)
            np.testing.assert_array_equal(generate(spec).values, generate(spec).values)
        a = generate(GeneratorSpec("ar2", 1000, seed=1)).values
        b = generate(GeneratorSpec("ar2", 1000, seed=2)).values
        self.assertFalse(np.array_equal(a, b))

    def test_brownian_is_cumulative_white_noise(self):
        noise = generate(GeneratorSpec("white_noise", 500, seed=3)).values
        walk = generate(GeneratorSpec("brownian", 500, seed=3)).values
        np.testing.assert_allclose(walk, np.cumsum(noise))

    def test_periodic_is_exact(self):
        for waveform in ("sine", "sawtooth"):
            x = generate(GeneratorSpec("periodic", 1050,
                                       params={"period": 100, "waveform": waveform})).values
            self.assertEqual(x.size, 1050)
            np.testing.assert_array_equal(x[100:], x[:-100])

    def test_from_series(self):
        x = generate(GeneratorSpec("from_series", 3, params={"values": [4.0, 5.0, 6.0, 7.0]}))
        np.testing.assert_array_equal(x.values, [4.0, 5.0, 6.0])

    def test_ar2_variance_and_autocorrelation(self):
        T = 200000
        x = SignalGenerator(GeneratorSpec("ar2", T, seed=5)).generate()
        variance = ar2_variance(**DEFAULT_AR2)
        self.assertAlmostEqual(variance, 116.9, delta=0.1)
        self.assertAlmostEqual(float(np.var(x.values)) / variance, 1.0, delta=0.1)

        rho = ar2_autocorrelation(DEFAULT_AR2["a1"], DEFAULT_AR2["a2"], 20)
        for d in range(1, 21):
            self.assertAlmostEqual(autocorr(x, d), rho[d], delta=0.05)

    def test_theoretical_autocorrelation(self):
        rho = ar2_autocorrelation(0.5, 0.0, 3)
        np.testing.assert_allclose(rho, [1.0, 0.5, 0.25, 0.125])
        with self.assertRaises(DomainError):
            ar2_autocorrelation(1.0, 0.5, 3)


class TestDisturb(unittest.TestCase):
    """Tests for the disturbances"""

    def setUp(self):
        self.x = generate(GeneratorSpec("ar2", 5000, seed=9))

    def test_monotone_transform_keeps_patterns(self):
        y = disturb(self.x, DisturbanceSpec("monotone_transform", scale=7.0))
        for d in (1, 10, 50):
            self.assertEqual(count_patterns3(self.x, d), count_patterns3(y, d))

    def test_outliers(self):
        y = disturb(self.x, DisturbanceSpec("outliers", seed=1, fraction=0.01, amplitude_in_sigmas=20))
        changed = self.x.values != y.values
        self.assertEqual(int(changed.sum()), 50)
        spikes = np.abs(y.values[changed] - self.x.values.mean())
        np.testing.assert_allclose(spikes, 20 * self.x.values.std())

    def test_noise_snr(self):
        y = disturb(self.x, DisturbanceSpec("additive_white_noise", seed=2, snr=1.0))
        ratio = np.var(y.values - self.x.values) / np.var(self.x.values)
        self.assertAlmostEqual(ratio, 1.0, delta=0.1)

    def test_low_freq(self):
        y = disturb(self.x, DisturbanceSpec("low_freq", period_scale=300.0))
        np.testing.assert_allclose(y.values - self.x.values, np.sin(np.arange(5000) / 300.0),
                                   atol=1e-9)

    def test_monotone_transform_overflow(self):
        with self.assertRaises(DomainError) as ctx:
            disturb([0.0, 7100.0, 1.0], DisturbanceSpec("monotone_transform", scale=7.0))
        self.assertIn("scale=7", str(ctx.exception))
        y = disturb([0.0, 7100.0, 1.0], DisturbanceSpec("monotone_transform", scale=20.0))
        self.assertTrue(np.isfinite(y.values).all())

    def test_invalid_disturbances(self):
        with self.assertRaises(DomainError):
            DisturbanceSpec("outliers", fraction=1.5)
        with self.assertRaises(DomainError):
            DisturbanceSpec("additive_white_noise", snr=0.0)
        with self.assertRaises(DomainError):
            DisturbanceSpec("shuffle")


if __name__ == '__main__':
    unittest.main()
