"""
Unit tests for the determinant constants and the log det* assembly.
"""

import math
import unittest

import mpmath

from src.errors import DomainError, ExperimentalFeatureError, ParameterMismatchError
from src.extended_log import ExtendedLog
from src.detlap import (c_n_constant, glaisher_log, log_barnes_g_int, log_det_laplacian,
                        spectral_constants, zeta_prime_minus_one)
from src.zeta import ZetaEvaluation, ZetaPrimeEstimate


def c_n_oracle(n):
    """c_n from mpmath's Barnes G, log Gamma and zeta'."""
    m = 2 * n - 1
    with mpmath.workdps(30):
        value = (mpmath.log(mpmath.barnesg(m)) / (2 * mpmath.pi)
                 - (2 * n - 3) / (4 * mpmath.pi) * mpmath.loggamma(m)
                 + mpmath.mpf(m) ** 2 / (8 * mpmath.pi)
                 - m * mpmath.log(2 * mpmath.pi) / (8 * mpmath.pi)
                 - mpmath.zeta(-1, derivative=1) / mpmath.pi)
        return float(value)


class TestBarnesG(unittest.TestCase):
    """Barnes G at positive integers."""

    def test_known_values(self):
        """G(1..6) = 1, 1, 1, 2, 12, 288."""
        for m, value in zip(range(1, 7), (1, 1, 1, 2, 12, 288)):
            self.assertAlmostEqual(log_barnes_g_int(m), math.log(value), places=12)

    def test_recurrence(self):
        """G(m + 1) = Gamma(m) G(m)."""
        for m in range(2, 12):
            self.assertAlmostEqual(log_barnes_g_int(m + 1),
                                   log_barnes_g_int(m) + math.lgamma(m), places=12)

    def test_domain(self):
        with self.assertRaises(DomainError):
            log_barnes_g_int(0)


class TestConstants(unittest.TestCase):
    """Glaisher-Kinkelin, zeta'(-1) and c_n."""

    def test_zeta_prime_minus_one(self):
        """Matches mpmath to 1e-10."""
        expected = float(mpmath.zeta(-1, derivative=1))
        self.assertAlmostEqual(zeta_prime_minus_one(), expected, delta=1e-10)
        self.assertAlmostEqual(zeta_prime_minus_one(), -0.1654211437, delta=1e-9)

    def test_glaisher_routes_agree(self):
        """Euler-Maclaurin and the zeta'(2) identity give the same log A."""
        self.assertAlmostEqual(glaisher_log("euler-maclaurin"), glaisher_log("zeta-prime-two"),
                               delta=1e-12)
        self.assertAlmostEqual(math.exp(glaisher_log()), float(mpmath.glaisher), delta=1e-12)
        with self.assertRaises(DomainError):
            glaisher_log("series")

    def test_c_n(self):
        """c_n agrees with the mpmath rendition and c_2 is about 0.1362."""
        for n in (1, 2, 3, 4, 5, 6):
            self.assertAlmostEqual(c_n_constant(n), c_n_oracle(n), delta=1e-12)
        self.assertAlmostEqual(c_n_constant(2), 0.13621, delta=1e-5)
        with self.assertRaises(DomainError):
            c_n_constant(0)

    def test_spectral_constants(self):
        """log C_{g,n} = -c_n vol with vol = 4 pi (g - 1)."""
        constants = spectral_constants(3, 2)
        self.assertAlmostEqual(constants.vol, 8.0 * math.pi, places=12)
        self.assertAlmostEqual(constants.log_C_gn, -constants.c_n * constants.vol, places=12)
        with self.assertRaises(DomainError):
            spectral_constants(1, 2)


class TestLogDet(unittest.TestCase):
    """Assembly of log det* from a zeta value."""

    def test_weight_two(self):
        """log C + log Z(2) + 2 (n + 1/3)(g - 1) log 2."""
        log_z = -0.25
        expected = spectral_constants(2, 2).log_C_gn + log_z + 2.0 * (7.0 / 3.0) * math.log(2.0)
        self.assertAlmostEqual(log_det_laplacian(2, 2, log_z), expected, places=12)
        evaluation = ZetaEvaluation(2.0, log_z, 40, 3.0, ExtendedLog.finite(-20.0))
        self.assertAlmostEqual(log_det_laplacian(2, 2, evaluation), expected, places=12)

    def test_genus_scaling(self):
        """The log 2 term grows linearly in g - 1."""
        a = log_det_laplacian(2, 3, 0.0) - spectral_constants(2, 3).log_C_gn
        b = log_det_laplacian(4, 3, 0.0) - spectral_constants(4, 3).log_C_gn
        self.assertAlmostEqual(b, 3.0 * a, places=12)

    def test_mismatched_point(self):
        """A zeta value at the wrong s is refused."""
        evaluation = ZetaEvaluation(3.0, -0.1, 40, 3.0, ExtendedLog.finite(-20.0))
        with self.assertRaises(ParameterMismatchError):
            log_det_laplacian(2, 2, evaluation)
        with self.assertRaises(ParameterMismatchError):
            log_det_laplacian(2, 2, ZetaPrimeEstimate(0.5, ()))

    def test_weight_one(self):
        """Needs the experimental flag and a Z'(1) estimate."""
        estimate = ZetaPrimeEstimate(0.5, ())
        with self.assertRaises(ExperimentalFeatureError):
            log_det_laplacian(2, 1, estimate)
        with self.assertRaises(ParameterMismatchError):
            log_det_laplacian(2, 1, -0.3, experimental=True)
        with self.assertLogs("src.detlap", level="WARNING"):
            value = log_det_laplacian(2, 1, estimate, experimental=True)
        expected = (spectral_constants(2, 1).log_C_gn + 0.5
                    + (2.0 / 3.0 + 2.0) * math.log(2.0))
        self.assertAlmostEqual(value, expected, places=12)


if __name__ == '__main__':
    unittest.main(verbosity=2)
