#!/usr/bin/env python3
"""
Unit tests for pattern counting.
"""

import os
import sys
import math
import unittest

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from exceptions import DegenerateWindowError, DomainError
from pattern_counter import (CYCLIC, LINEAR, PATTERN_LABELS, PatternHistogram, TimeSeries,
                             count_pairs, count_patterns3, count_patterns_n,
                             cumulative_preprocess, embed_ranks, negate_series,
                             pattern_symbols, reverse_series, to_frequencies)


def naive_patterns3(values, d, mode):
    """Rank every triple by sorting; returns (counts, ties, missing)."""
    T = len(values)
    positions = range(T - 2 * d) if mode == LINEAR else range(T)
    counts = [0] * 6
    ties = missing = 0
    for t in positions:
        triple = [values[(t + k * d) % T] for k in range(3)]
        if any(math.isnan(v) for v in triple):
            missing += 1
        elif len(set(triple)) < 3:
            ties += 1
        else:
            ranks = "".join(str(sorted(triple).index(v) + 1) for v in triple)
            counts[PATTERN_LABELS.index(ranks)] += 1
    return counts, ties, missing


class TestTimeSeries(unittest.TestCase):
    """Tests for the TimeSeries container"""

    def test_rejects_empty_and_infinite(self):
        with self.assertRaises(DomainError):
            TimeSeries([])
        with self.assertRaises(DomainError):
            TimeSeries([1.0, float("inf")])

    def test_values_are_read_only(self):
        x = TimeSeries([1.0, 2.0, float("nan")])
        self.assertEqual(x.T, 3)
        self.assertEqual(x.missing_count, 1)
        with self.assertRaises(ValueError):
            x.values[0] = 5.0

    def test_equality_treats_nan_as_equal(self):
        self.assertEqual(TimeSeries([1.0, float("nan")]), TimeSeries([1.0, float("nan")]))
        self.assertNotEqual(TimeSeries([1.0, 2.0]), TimeSeries([1.0, 3.0]))


class TestCountPairs(unittest.TestCase):
    """Tests for count_pairs"""

    def test_monotone(self):
        c = count_pairs([1, 2, 3, 4, 5], 1)
        self.assertEqual((c.n12, c.n21, c.excluded), (4, 0, 0))

    def test_all_ties(self):
        c = count_pairs([1, 1, 1], 1)
        self.assertEqual((c.n12, c.n21, c.excluded), (0, 0, 2))

    def test_small_example_matches_enumeration(self):
        x = [1, 3, 2, 5, 4]
        c = count_pairs(x, 2)
        n12 = sum(x[t] < x[t + 2] for t in range(3))
        n21 = sum(x[t] > x[t + 2] for t in range(3))
        self.assertEqual((c.n12, c.n21, c.excluded), (n12, n21, 0))
        self.assertEqual((c.n12, c.n21), (3, 0))

    def test_cyclic_uses_every_position(self):
        c = count_pairs([1, 3, 2, 5, 4], 1, CYCLIC)
        self.assertEqual(c.valid + c.excluded, 5)

    def test_missing_counts_as_excluded(self):
        c = count_pairs([1, float("nan"), 3, 4], 1)
        self.assertEqual((c.n12, c.excluded), (1, 2))

    def test_delay_out_of_range(self):
        with self.assertRaises(DomainError):
            count_pairs([1, 2, 3], 3)
        with self.assertRaises(DomainError):
            count_pairs([1, 2, 3], 0)
        with self.assertRaises(DomainError):
            count_pairs([1, 2, 3], 1.5)


class TestCountPatterns3(unittest.TestCase):
    """Tests for length-3 pattern counting"""

    def test_small_example(self):
        h = count_patterns3([1, 3, 2, 5, 4], 1)
        self.assertEqual(h.as_dict(), {"123": 0, "132": 2, "213": 1, "231": 0, "312": 0, "321": 0})
        self.assertEqual(h.S, 3)
        self.assertEqual(h.excluded_ties + h.excluded_missing, 0)

    def test_monotone(self):
        h = count_patterns3([1, 2, 3, 4, 5], 1)
        self.assertEqual(h.counts, (3, 0, 0, 0, 0, 0))

    def test_missing_propagates_to_triples(self):
        h = count_patterns3([1, float("nan"), 2, 3, 4], 1)
        self.assertEqual(h.excluded_missing, 2)
        self.assertEqual(h.S, 1)
        self.assertEqual(h.counts[0], 1)

    def test_missing_takes_precedence_over_ties(self):
        h = count_patterns3([1, 1, float("nan")], 1)
        self.assertEqual((h.excluded_missing, h.excluded_ties), (1, 0))

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(7)
        for trial in range(30):
            T = int(rng.integers(5, 60))
            values = rng.integers(0, 6, size=T).astype(float)
            values[rng.random(T) < 0.05] = np.nan
            for mode in (LINEAR, CYCLIC):
                for d in range(1, (T - 1) // 2 + 1):
                    h = count_patterns3(values, d, mode)
                    counts, ties, missing = naive_patterns3(list(values), d, mode)
                    self.assertEqual(list(h.counts), counts, f"trial {trial} d={d} {mode}")
                    self.assertEqual((h.excluded_ties, h.excluded_missing), (ties, missing))
                    self.assertEqual(h.positions, T - 2 * d if mode == LINEAR else T)

    def test_monotone_transform_invariance(self):
        x = np.random.default_rng(1).standard_normal(500)
        for d in (1, 3, 10):
            self.assertEqual(count_patterns3(x, d), count_patterns3(np.exp(x / 7.0), d))
            self.assertEqual(count_patterns3(x, d), count_patterns3(3.0 * x + 2.0, d))

    def test_reversal_and_negation_permute_patterns(self):
        x = np.random.default_rng(2).standard_normal(300)
        for d in (1, 2, 7):
            c = count_patterns3(x, d).counts
            rev = count_patterns3(reverse_series(x), d).counts
            neg = count_patterns3(negate_series(x), d).counts
            # 123<->321, 132<->231, 213<->312
            self.assertEqual(rev, (c[5], c[3], c[4], c[1], c[2], c[0]))
            # 123<->321, 132<->312, 213<->231
            self.assertEqual(neg, (c[5], c[4], c[3], c[2], c[1], c[0]))

    def test_single_outlier_changes_at_most_three_triples(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(400)
        for d in (1, 5, 20):
            y = x.copy()
            y[200] = 50.0
            s1, _, _ = pattern_symbols(x, d)
            s2, _, _ = pattern_symbols(y, d)
            self.assertLessEqual(int(np.count_nonzero(s1 != s2)), 3)

    def test_delay_too_large_for_linear(self):
        with self.assertRaises(DomainError):
            count_patterns3([1, 2, 3, 4], 2)
        with self.assertRaises(DomainError):
            count_patterns3([1, 2, 3, 4], 1, mode="circular")


class TestFrequencies(unittest.TestCase):
    """Tests for to_frequencies"""

    def test_frequencies(self):
        p = to_frequencies(count_patterns3([1, 3, 2, 5, 4], 1))
        self.assertEqual(p.S, 3)
        self.assertAlmostEqual(p.p[1], 2.0 / 3.0)
        self.assertAlmostEqual(p.p[2], 1.0 / 3.0)

    def test_uniform_counts(self):
        h = PatternHistogram(counts=(4,) * 6, excluded_ties=0, excluded_missing=0, d=1)
        self.assertEqual(to_frequencies(h).p, (1.0 / 6.0,) * 6)

    def test_no_valid_triples(self):
        with self.assertRaises(DegenerateWindowError):
            to_frequencies(count_patterns3([2, 2, 2, 2], 1))


class TestOrderN(unittest.TestCase):
    """Tests for order-n patterns"""

    def test_order_three_matches_triples(self):
        x = np.random.default_rng(4).integers(0, 8, size=200).astype(float)
        for mode in (LINEAR, CYCLIC):
            for d in (1, 4):
                hn = count_patterns_n(x, d, 3, mode)
                h3 = count_patterns3(x, d, mode)
                self.assertEqual(hn.counts, h3.counts)
                self.assertEqual(hn.excluded_ties, h3.excluded_ties)

    def test_order_two_matches_pairs(self):
        x = np.random.default_rng(5).standard_normal(100)
        hn = count_patterns_n(x, 3, 2)
        pairs = count_pairs(x, 3)
        self.assertEqual(hn.counts, (pairs.n12, pairs.n21))

    def test_bookkeeping(self):
        x = np.random.default_rng(6).uniform(size=24)
        h = count_patterns_n(x, 1, 4)
        self.assertEqual(len(h.counts), 24)
        self.assertEqual(h.total + h.excluded, 21)

    def test_lexicographic_index(self):
        codes, ties, missing = embed_ranks([1, 2, 3, 4, 3, 2, 1], 1, 4)
        self.assertEqual(codes[0], 0)
        self.assertEqual(codes[-1], 23)
        self.assertFalse(ties[0] or missing[0])

    def test_order_out_of_range(self):
        with self.assertRaises(DomainError):
            count_patterns_n(range(20), 1, 8)
        with self.assertRaises(DomainError):
            count_patterns_n(range(20), 1, 1)


class TestCumulativePreprocess(unittest.TestCase):
    """Tests for cumulative_preprocess"""

    def test_running_sums(self):
        np.testing.assert_array_equal(cumulative_preprocess([1, 2, 3]).values, [1, 3, 6])
        np.testing.assert_array_equal(cumulative_preprocess([0, 0, 0]).values, [0, 0, 0])

    def test_missing_propagates(self):
        y = cumulative_preprocess([1, float("nan"), 3])
        self.assertEqual(y.values[0], 1.0)
        self.assertTrue(np.isnan(y.values[1:]).all())

    def test_skip_missing_flags_positions(self):
        y = cumulative_preprocess([1, float("nan"), 3], policy="skip-missing")
        np.testing.assert_array_equal(y.values, [1, 1, 4])
        np.testing.assert_array_equal(y.imputed, [False, True, False])

    def test_unknown_policy(self):
        with self.assertRaises(DomainError):
            cumulative_preprocess([1, 2], policy="zero")


if __name__ == '__main__':
    unittest.main()
