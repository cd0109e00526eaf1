"""
Unit tests for pinching families, envelopes and the bound checks.
"""

import math
import os
import unittest
from unittest import mock

import mpmath

from src import degeneration
from src.degeneration import (BoundRecord, EnvelopeKind, EnvelopeParams, FamilySpec,
                              bound_record_from_spectrum, check_bounds, envelope,
                              make_pinching_family, tau_coordinate, tau_to_ell,
                              wolpert_ratio_band)
from src.errors import DomainError, ParameterMismatchError
from src.length_spectrum import LengthSpectrum
from src.surface_group import builtin_octagon

SLOW = os.environ.get("SELBERG_LAB_SLOW") == "1"
BASE_FN = (1.0, 2.0, 2.0, 0.0, 0.0, 0.0)


class TestTauCoordinate(unittest.TestCase):
    """|tau| = exp(-2 pi^2 / l)."""

    def test_round_trip(self):
        for ell in (0.1, 0.5, 1.0, 3.0):
            self.assertAlmostEqual(tau_to_ell(tau_coordinate(ell)), ell, places=12)

    def test_monotone(self):
        """|tau| shrinks to 0 as the curve is pinched."""
        taus = [tau_coordinate(ell) for ell in (2.0, 1.0, 0.5, 0.25)]
        self.assertEqual(taus, sorted(taus, reverse=True))
        self.assertTrue(all(0.0 < tau < 1.0 for tau in taus))

    def test_domain(self):
        with self.assertRaises(DomainError):
            tau_coordinate(0.0)
        with self.assertRaises(DomainError):
            tau_to_ell(1.0)


class TestFamily(unittest.TestCase):
    """Construction of pinching families."""

    def test_spec_validation(self):
        """Bad coordinates, indices, grids and weights are refused."""
        with self.assertRaises(DomainError):
            FamilySpec(BASE_FN[:5], (1,), (1.0,))
        with self.assertRaises(DomainError):
            FamilySpec(BASE_FN, (4,), (1.0,))
        with self.assertRaises(DomainError):
            FamilySpec(BASE_FN, (1,), (0.5, 1.0))
        with self.assertRaises(DomainError):
            FamilySpec(BASE_FN, (1,), (1.0, 0.0))
        with self.assertRaises(DomainError):
            FamilySpec(BASE_FN, (1,), (1.0,), n_values=(1, 2))

    def test_members(self):
        """One valid presentation per grid value carrying its pinched lengths."""
        family = make_pinching_family(FamilySpec(BASE_FN, (1, 2), (1.0, 0.5)))
        self.assertEqual(len(family), 2)
        for member, ell in zip(family, (1.0, 0.5)):
            self.assertEqual(member.pinched_lengths, (ell, ell))
            self.assertEqual(member.fn_coordinates[0], ell)
            self.assertEqual(member.fn_coordinates[1], ell)
            self.assertEqual(member.fn_coordinates[2], 2.0)
            self.assertIn(f"pinch[1, 2]={ell:g}", member.label)
            self.assertLess(member.relator_residual(0), 1e-9)


class TestEnvelopes(unittest.TestCase):
    """Closed forms of the asymptotic envelopes."""

    def test_z2_shape(self):
        """At l = 1 the Z2_SHAPE envelope is -pi^2/3."""
        value = envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(ells=(1.0,)))
        self.assertAlmostEqual(value.log_value, -math.pi ** 2 / 3.0, places=12)
        zprime1 = envelope("zprime1_shape", EnvelopeParams(ells=(0.5,)))
        self.assertAlmostEqual(zprime1.log_value, -2.0 * math.pi ** 2 / 3.0 + math.log(2.0),
                               places=12)

    def test_ratio_upper_saturates(self):
        """e^{160 pi / l} overflows at l = 0.05."""
        value = envelope(EnvelopeKind.RATIO_UPPER, EnvelopeParams(n=3, ells=(0.05,)))
        self.assertTrue(value.is_saturated)
        self.assertAlmostEqual(value.inner_exponent, 160.0 * math.pi / 0.05, places=6)
        self.assertTrue(value.bounds(1e300))

    def test_ratio_upper_finite(self):
        """At l = 3 the envelope is finite and matches mpmath."""
        value = envelope(EnvelopeKind.RATIO_UPPER, EnvelopeParams(n=2, ells=(3.0,)))
        with mpmath.workdps(30):
            expected = float(mpmath.log(5) + mpmath.exp(160 * mpmath.pi / 3) / 9)
        self.assertFalse(value.is_saturated)
        self.assertAlmostEqual(value.log_value / expected, 1.0, places=12)

    def test_taus_equal_ells(self):
        """The same curve given by |tau| or by length gives the same envelope."""
        for kind in (EnvelopeKind.TAU_RATIO_LOWER, EnvelopeKind.MUMFORD_POLE,
                     EnvelopeKind.DET_QUOTIENT_LOWER):
            by_ell = envelope(kind, EnvelopeParams(n=3, ells=(0.7,)))
            by_tau = envelope(kind, EnvelopeParams(n=3, taus=(tau_coordinate(0.7),)))
            self.assertAlmostEqual(by_ell.log_value, by_tau.log_value, places=9)

    def test_mu_pole(self):
        """n(n-1)/2 |log|tau|| at n = 3, l = 1 is 6 pi^2."""
        value = envelope(EnvelopeKind.MUMFORD_POLE, EnvelopeParams(n=3, ells=(1.0,)))
        self.assertAlmostEqual(value.log_value, 6.0 * math.pi ** 2, places=10)

    def test_weight_only(self):
        """DET_QUOTIENT_GROWTH and DET_COMPACT_GROWTH depend on n and g only."""
        params = EnvelopeParams(g=2, n=2, ells=(0.3,))
        self.assertAlmostEqual(envelope(EnvelopeKind.DET_QUOTIENT_GROWTH, params).log_value,
                               math.log(4.0) + 8.0, places=12)
        self.assertAlmostEqual(envelope(EnvelopeKind.DET_COMPACT_GROWTH, params).log_value,
                               math.log(4.0), places=12)

    def test_det_quotient_ordering(self):
        """The upper determinant envelope lies above the lower one."""
        params = EnvelopeParams(n=2, ells=(4.0,))
        lower = envelope(EnvelopeKind.DET_QUOTIENT_LOWER, params)
        upper = envelope(EnvelopeKind.DET_QUOTIENT_UPPER, params)
        self.assertFalse(upper.is_saturated)
        self.assertGreater(upper.log_value, lower.log_value)

    def test_tau_ratio_upper_saturates(self):
        value = envelope(EnvelopeKind.TAU_RATIO_UPPER, EnvelopeParams(n=2, ells=(0.25,)))
        self.assertTrue(value.is_saturated)
        lower = envelope(EnvelopeKind.TAU_RATIO_LOWER, EnvelopeParams(ells=(0.25,)))
        self.assertGreater(value, lower)

    def test_errors(self):
        """Unknown kinds, bad genus, bad weight and mixed inputs."""
        with self.assertRaises(DomainError):
            envelope("nope", EnvelopeParams(ells=(1.0,)))
        with self.assertRaises(DomainError):
            envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(g=1, ells=(1.0,)))
        with self.assertRaises(ParameterMismatchError):
            envelope(EnvelopeKind.RATIO_UPPER, EnvelopeParams(n=1, ells=(1.0,)))
        with self.assertRaises(ParameterMismatchError):
            envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(ells=(1.0,), taus=(0.1,)))


class TestBoundRecords(unittest.TestCase):
    """Bound checks on synthetic spectra."""

    def setUp(self):
        self.spec = LengthSpectrum.from_entries([(1.0, 2), (1.6, 4)], cutoff=2.0)

    def test_record(self):
        """Values, envelopes and both checks for n = 2..4."""
        record = bound_record_from_spectrum(self.spec, (1.0,), 2, (2, 3, 4), label="toy")
        self.assertTrue(record.valid)
        self.assertEqual(record.log_Zn[2], record.log_Z2)
        self.assertLess(record.log_Z2, 0.0)
        self.assertEqual(record.tau_abs, (tau_coordinate(1.0),))
        for n in (2, 3, 4):
            self.assertTrue(record.lower_ok[n])
            self.assertTrue(record.upper_ok[n])
            self.assertEqual(set(record.envelope_logs[n]), set(EnvelopeKind))

    def test_unpinched_record(self):
        """Without pinched curves the upper check is log((4n^2-4n-3)) against the ratio."""
        record = bound_record_from_spectrum(self.spec, (), 2, (3,))
        self.assertAlmostEqual(record.envelope_logs[3][EnvelopeKind.RATIO_UPPER].log_value,
                               math.log(21.0), places=12)
        self.assertTrue(record.upper_ok[3])

    def test_wolpert_band(self):
        """The band is zero for one record and ignores invalid ones."""
        a = bound_record_from_spectrum(self.spec, (1.0,), 2, (2,))
        b = bound_record_from_spectrum(self.spec, (0.5,), 2, (2,))
        invalid = BoundRecord("bad", (0.3,), (tau_coordinate(0.3),), math.nan, valid=False)
        self.assertEqual(wolpert_ratio_band([a, invalid]), 0.0)
        expected = abs(envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(ells=(1.0,))).log_value
                       - envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(ells=(0.5,))).log_value)
        self.assertAlmostEqual(wolpert_ratio_band([a, b]), expected, places=12)
        with self.assertRaises(DomainError):
            wolpert_ratio_band([invalid])


class TestCheckBounds(unittest.TestCase):
    """Bound checks on enumerated surfaces."""

    def test_invalid_members_kept(self):
        """Members with no geodesic below the cutoff become invalid records in order."""
        family = make_pinching_family(FamilySpec(BASE_FN, (1,), (1.0, 0.8)))
        records = check_bounds(family, (2, 3), cutoffs=0.3, max_depth=2, threads=2)
        self.assertEqual([r.ell for r in records], [(1.0,), (0.8,)])
        for record in records:
            self.assertFalse(record.valid)
            self.assertTrue(math.isnan(record.log_Z2))
            self.assertTrue(record.reason)

    def test_octagon(self):
        """The octagon satisfies the lower bound for every n."""
        records = check_bounds([builtin_octagon()], (2, 3, 4, 5, 6), cutoffs=3.1, max_depth=6)
        self.assertEqual(len(records), 1)
        record = records[0]
        self.assertTrue(record.valid)
        self.assertTrue(all(record.lower_ok.values()))
        self.assertTrue(all(record.upper_ok.values()))

    def test_member_validation_failure_marked_invalid(self):
        """A member whose own matrices are rejected is flagged, the sweep carries on."""
        family = make_pinching_family(FamilySpec(BASE_FN, (1,), (1.0, 0.5)))
        real = degeneration.enumerate_spectrum

        def failing_first(member, *args, **kwargs):
            if member is family[0]:
                raise DomainError("determinant 0.999999999998181 is not 1")
            return real(member, *args, **kwargs)

        with mock.patch.object(degeneration, "enumerate_spectrum", failing_first):
            records = check_bounds(family, (2,), cutoffs=0.6, max_depth=3, threads=2)
        self.assertFalse(records[0].valid)
        self.assertIn("determinant", records[0].reason)
        self.assertTrue(records[1].valid)

    def test_mismatched_lengths(self):
        family = make_pinching_family(FamilySpec(BASE_FN, (1,), (1.0, 0.8)))
        with self.assertRaises(ParameterMismatchError):
            check_bounds(family, (2,), cutoffs=[0.3], max_depth=2)
        with self.assertRaises(DomainError):
            check_bounds(family, (1,), cutoffs=0.3, max_depth=2)


@unittest.skipUnless(SLOW, "set SELBERG_LAB_SLOW=1 for the family sweep")
class TestFamilySweep(unittest.TestCase):
    """Bounds and the Wolpert trend along a pinching family."""

    @classmethod
    def setUpClass(cls):
        grid = (1.0, 0.5, 0.25)
        family = make_pinching_family(FamilySpec(BASE_FN, (1,), grid))
        cls.records = check_bounds(family, (2, 3, 4, 5, 6), cutoffs=2.5, max_depth=7, threads=4)

    def test_every_member_valid(self):
        self.assertEqual([r.valid for r in self.records], [True, True, True])

    def test_lower_bound_along_family(self):
        for record in self.records:
            self.assertTrue(all(record.lower_ok.values()))
            self.assertTrue(all(record.upper_ok.values()))

    def test_wolpert_band(self):
        """log Z(2) minus the Z2_SHAPE envelope varies by at most 3 over the grid."""
        self.assertLessEqual(wolpert_ratio_band(self.records), 3.0)

    def test_thread_count_irrelevant(self):
        family = make_pinching_family(FamilySpec(BASE_FN, (1,), (1.0, 0.5, 0.25)))
        serial = check_bounds(family, (2, 3), cutoffs=2.5, max_depth=7, threads=1)
        for mine, theirs in zip(serial, self.records):
            self.assertEqual(mine.log_Z2, theirs.log_Z2)
            self.assertEqual(mine.log_Zn[3], theirs.log_Zn[3])


if __name__ == '__main__':
    unittest.main(verbosity=2)
