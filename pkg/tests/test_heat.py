"""
Unit tests for the hyperbolic heat kernel, the heat trace and t0.

High-precision oracles are evaluated with mpmath inside the tests.
"""

import math
import os
import unittest

import mpmath

from src.errors import DomainError, RangeError, WordBudgetExceeded
from src.heat import (assembled_heat_trace, find_t0, heat_kernel_h, heat_kernel_h_scaled,
                      heat_trace, heat_trace_lower_bound, identity_term, periodized_kernel)
from src.length_spectrum import LengthSpectrum, enumerate_spectrum
from src.moebius import Point, hyperbolic_distance
from src.surface_group import builtin_octagon

SLOW = os.environ.get("SELBERG_LAB_SLOW") == "1"


def kernel_oracle(t, rho, dps=30):
    """K_H(t; rho) from its defining integral at high precision."""
    with mpmath.workdps(dps):
        t, rho = mpmath.mpf(t), mpmath.mpf(rho)

        # s = rho + u^2; cosh s - cosh rho = 2 sinh(rho + u^2/2) sinh(u^2/2)
        def f(u):
            s = rho + u * u
            den = mpmath.sqrt(2 * mpmath.sinh(rho + u * u / 2) * mpmath.sinh(u * u / 2))
            return 2 * u * s * mpmath.exp(-s * s / (4 * t)) / den

        integral = mpmath.quad(f, [0, 1, 4, mpmath.inf])
        return float(mpmath.sqrt(2) * mpmath.exp(-t / 4) / (4 * mpmath.pi * t) ** 1.5 * integral)


def trace_oracle(pairs, t, powers=50):
    """Direct sum of the geometric side for a synthetic spectrum."""
    total = 0.0
    for length, mult in pairs:
        for n in range(1, powers + 1):
            x = n * length
            total += mult * length * math.exp(-x * x / (4.0 * t)) / math.sinh(x / 2.0)
    return math.exp(-t / 4.0) / (2.0 * math.sqrt(4.0 * math.pi * t)) * total


class TestHeatKernel(unittest.TestCase):
    """K_H(t; rho) on the hyperbolic plane."""

    def test_against_oracle(self):
        """Matches the high-precision integral to 1e-10 relative."""
        for t, rho in ((1.0, 0.0), (1.0, 0.5), (0.3, 2.0), (5.0, 1.0)):
            expected = kernel_oracle(t, rho)
            self.assertAlmostEqual(heat_kernel_h(t, rho) / expected, 1.0, places=10)

    def test_far_field(self):
        """K_H(1; 50) is negligible."""
        self.assertLessEqual(heat_kernel_h(1.0, 50.0), 1e-15)

    def test_decreasing_in_distance(self):
        """The kernel decreases with distance."""
        values = [heat_kernel_h(2.0, rho) for rho in (0.0, 0.5, 1.0, 2.0, 4.0)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_scaled_form(self):
        """The scaled kernel carries the factor e^{t/4}."""
        self.assertAlmostEqual(heat_kernel_h_scaled(3.0, 0.7) * math.exp(-0.75),
                               heat_kernel_h(3.0, 0.7), places=14)
        self.assertGreater(heat_kernel_h_scaled(4000.0, 0.0), 0.0)

    def test_domain(self):
        """t must be positive and rho non-negative."""
        with self.assertRaises(DomainError):
            heat_kernel_h(0.0, 1.0)
        with self.assertRaises(DomainError):
            heat_kernel_h(1.0, -0.1)


class TestHeatTrace(unittest.TestCase):
    """Heat trace from a length spectrum."""

    def setUp(self):
        self.pairs = [(1.0, 2), (1.7, 6)]
        self.spec = LengthSpectrum.from_entries(self.pairs, cutoff=2.0)

    def test_matches_direct_sum(self):
        """Agrees with the plain double sum."""
        for t in (0.5, 2.0, 10.0):
            sample = heat_trace(self.spec, t)
            self.assertAlmostEqual(sample.value / trace_oracle(self.pairs, t), 1.0, places=12)
            self.assertGreater(sample.value, 0.0)
            self.assertFalse(sample.tail_log_bound.is_saturated)

    def test_lower_bound_uses_value_only(self):
        """The lower-bound check never credits the tail, however large it is."""
        for t in (2.5, 10.0, 50.0):
            sample = heat_trace(self.spec, t)
            self.assertGreater(sample.tail_bound, 0.0)
            above = sample.value * (1.0 + 1e-9) + 1e-300
            self.assertTrue(sample.satisfies_lower_bound(sample.value))
            self.assertFalse(sample.satisfies_lower_bound(above))
            self.assertGreaterEqual(sample.upper_estimate, above)

    def test_dense_short_spectrum_meets_lower_bound(self):
        """A thousand geodesics of length 0.1 carry the trace past the bound at t = 2.5."""
        dense = LengthSpectrum.from_entries([(0.1, 1000)], cutoff=0.2)
        sample = heat_trace(dense, 2.5)
        self.assertTrue(sample.satisfies_lower_bound(heat_trace_lower_bound(2, 2.5)))
        self.assertFalse(heat_trace(self.spec, 50.0).satisfies_lower_bound(
            heat_trace_lower_bound(2, 50.0)))

    def test_assembled_trace(self):
        """Identity term plus HTr."""
        t = 3.0
        self.assertAlmostEqual(assembled_heat_trace(self.spec, t),
                               identity_term(2, t) + heat_trace(self.spec, t).value, places=14)
        self.assertAlmostEqual(identity_term(3, t), 2.0 * identity_term(2, t), places=14)

    def test_lower_bound_range(self):
        """The lower bound needs t > 2 and tends to 1."""
        with self.assertRaises(RangeError):
            heat_trace_lower_bound(2, 2.0)
        with self.assertRaises(DomainError):
            heat_trace_lower_bound(1, 3.0)
        self.assertLess(heat_trace_lower_bound(2, 50.0), 1.0)
        self.assertGreater(heat_trace_lower_bound(2, 50.0), 0.99)

    def test_invalid_inputs(self):
        """Non-positive times and unusable spectra are refused."""
        with self.assertRaises(DomainError):
            heat_trace(self.spec, 0.0)
        with self.assertRaises(DomainError):
            heat_trace(self.spec, 1.0, power_cap=0)


class TestThreshold(unittest.TestCase):
    """t0 where 4 pi (g-1) e^{t/4} K_H(t; 0) <= 1."""

    def test_genus_two(self):
        """For genus 2 the inequality already holds just above 2."""
        t0 = find_t0(2)
        self.assertGreater(t0, 2.0)
        self.assertLess(t0, 2.01)

    def test_larger_genus(self):
        """t0 grows with the genus and marks the crossing."""
        t4, t6 = find_t0(4), find_t0(6)
        self.assertGreater(t4, 2.0)
        self.assertGreater(t6, t4)
        self.assertLess(t6, 8.0)
        volume = 4.0 * math.pi * 5
        self.assertLessEqual(volume * heat_kernel_h_scaled(t6, 0.0), 1.0)
        self.assertGreater(volume * heat_kernel_h_scaled(t6 - 1e-3, 0.0), 1.0)

    def test_genus_check(self):
        """Genus below 2 is refused."""
        with self.assertRaises(DomainError):
            find_t0(1)


class TestPeriodizedKernel(unittest.TestCase):
    """Truncated sums over the octagon group."""

    def setUp(self):
        self.octagon = builtin_octagon()
        self.z = Point(0.0, 1.0)
        self.w = Point(0.2, 1.1)

    def test_depth_zero(self):
        """Depth 0 keeps only the identity."""
        result = periodized_kernel(self.octagon, 1.0, self.z, self.w, 0)
        self.assertEqual(result.element_count, 1)
        self.assertAlmostEqual(result.value,
                               heat_kernel_h(1.0, hyperbolic_distance(self.z, self.w)), places=14)

    def test_shells(self):
        """Depth 2 adds 64 distinct elements with shrinking contributions."""
        one = periodized_kernel(self.octagon, 1.0, self.z, self.w, 1)
        two = periodized_kernel(self.octagon, 1.0, self.z, self.w, 2)
        self.assertEqual(one.element_count, 9)
        self.assertEqual(two.element_count, 65)
        self.assertGreater(two.value, one.value)
        self.assertLess(two.last_shell_increment, one.last_shell_increment)

    def test_budget(self):
        """The word budget caps the depth."""
        with self.assertRaises(WordBudgetExceeded):
            periodized_kernel(self.octagon, 1.0, self.z, self.w, 3, word_budget=10)


@unittest.skipUnless(SLOW, "set SELBERG_LAB_SLOW=1 for the octagon trace sweep")
class TestOctagonTrace(unittest.TestCase):
    """Heat trace of the octagon surface on the acceptance grid."""

    @classmethod
    def setUpClass(cls):
        cls.spectrum = enumerate_spectrum(builtin_octagon(), cutoff=3.1, max_depth=6)

    def test_positive_and_decreasing(self):
        """HTr > 0 and decreasing in t; so is the assembled trace."""
        grid = (2.5, 3.0, 5.0, 10.0, 25.0, 50.0)
        values = [heat_trace(self.spectrum, t).value for t in grid]
        assembled = [assembled_heat_trace(self.spectrum, t) for t in grid]
        for seq in (values, assembled):
            self.assertTrue(all(v > 0.0 for v in seq))
            self.assertTrue(all(a > b for a, b in zip(seq, seq[1:])))

    def test_truncated_trace_misses_lower_bound(self):
        """Below cutoff 3.1 the summed trace falls short of 1 - 4 pi (g-1) K_H(t; 0)."""
        for t in (2.5, 5.0, 50.0):
            sample = heat_trace(self.spectrum, t)
            self.assertFalse(sample.satisfies_lower_bound(heat_trace_lower_bound(2, t)))
        self.assertLess(assembled_heat_trace(self.spectrum, 50.0), 1e-3)


if __name__ == '__main__':
    unittest.main(verbosity=2)
