from __future__ import annotations

import math
import unittest

import numpy as np
from scipy import special

from levlab.models import SpecialFunctionDomainError
from levlab.specfun import (
    ascending_series_j,
    asymptotic_jy,
    bessel_j,
    bessel_j_deriv,
    bessel_j_orders,
    bessel_jy,
    bessel_jy_orders,
    bessel_k,
    bessel_value,
    bessel_y,
    bessel_y_deriv,
    first_zero_j,
)

J01 = 2.404825557695773


class BesselJTests(unittest.TestCase):
    def test_reference_values(self) -> None:
        self.assertAlmostEqual(bessel_j(0, 1.0), 0.7651976865579666, places=14)
        self.assertAlmostEqual(bessel_j(1, 1.0), 0.4400505857449335, places=14)
        self.assertEqual(bessel_j(0, 0.0), 1.0)
        self.assertEqual(bessel_j(3, 0.0), 0.0)

    def test_matches_scipy_over_orders_and_arguments(self) -> None:
        for order in range(0, 15):
            for x in (0.01, 0.5, 2.0, 7.5, 18.0, 40.0, 120.0):
                with self.subTest(order=order, x=x):
                    self.assertAlmostEqual(bessel_j(order, x), float(special.jv(order, x)), delta=1e-12)

    def test_first_zero(self) -> None:
        self.assertAlmostEqual(first_zero_j(0), J01, places=12)
        self.assertAlmostEqual(first_zero_j(1), 3.8317059702075125, places=12)
        self.assertLess(abs(bessel_j(0, J01)), 1e-14)

    def test_derivatives_follow_recurrence(self) -> None:
        for order in (0, 1, 4):
            for x in (0.3, 3.0, 25.0):
                with self.subTest(order=order, x=x):
                    self.assertAlmostEqual(bessel_j_deriv(order, x), float(special.jvp(order, x)), delta=1e-12)
        self.assertEqual(bessel_j_deriv(1, 0.0), 0.5)
        value = bessel_value(2, 3.0)
        self.assertEqual(value.order, 2)
        self.assertAlmostEqual(value.value, float(special.jv(2, 3.0)), delta=1e-13)

    def test_series_and_miller_agree(self) -> None:
        xs = np.array([0.5, 1.5, 3.0, 5.0])
        table = bessel_j_orders(6, xs, full=False)
        self.assertEqual(table.shape, (7, 4))
        for order in range(7):
            for col, x in enumerate(xs):
                self.assertAlmostEqual(float(table[order, col]), ascending_series_j(order, float(x)), delta=1e-13)

    def test_domain_errors(self) -> None:
        with self.assertRaises(SpecialFunctionDomainError):
            bessel_j(-1, 1.0)
        with self.assertRaises(SpecialFunctionDomainError):
            bessel_j(1.5, 1.0)  # type: ignore[arg-type]
        with self.assertRaises(SpecialFunctionDomainError):
            bessel_j(0, -1.0)
        with self.assertRaises(SpecialFunctionDomainError):
            bessel_j(0, math.nan)


class BesselYKTests(unittest.TestCase):
    def test_reference_values(self) -> None:
        self.assertAlmostEqual(bessel_y(0, 1.0), 0.08825696421567696, places=12)
        self.assertAlmostEqual(bessel_y(1, 1.0), -0.7812128213002887, places=12)

    def test_y_matches_scipy(self) -> None:
        for order in range(0, 10):
            for x in (0.05, 0.7, 3.0, 11.0, 45.0):
                with self.subTest(order=order, x=x):
                    want = float(special.yv(order, x))
                    self.assertAlmostEqual(bessel_y(order, x), want, delta=1e-10 * max(1.0, abs(want)))

    def test_y_derivative_and_joint_evaluation(self) -> None:
        for order in (0, 2, 5):
            x = 4.2
            want = float(special.yvp(order, x))
            self.assertAlmostEqual(bessel_y_deriv(order, x), want, delta=1e-10 * max(1.0, abs(want)))
            j, jd, y, yd = bessel_jy(order, x)
            self.assertAlmostEqual(j, float(special.jv(order, x)), delta=1e-12)
            self.assertAlmostEqual(jd, float(special.jvp(order, x)), delta=1e-12)
            self.assertAlmostEqual(y, float(special.yv(order, x)), delta=1e-10)
            self.assertAlmostEqual(yd, want, delta=1e-10 * max(1.0, abs(want)))

    def test_wronskian(self) -> None:
        for x in (0.2, 2.0, 30.0):
            j, y = bessel_jy_orders(1, x)
            w = j[1, 0] * y[0, 0] - j[0, 0] * y[1, 0]
            self.assertAlmostEqual(w, 2.0 / (math.pi * x), delta=1e-11 / x)

    def test_wronskian_for_every_order_at_random_arguments(self) -> None:
        rng = np.random.default_rng(2024)
        x = rng.uniform(0.1, 40.0, 100)
        j, y = bessel_jy_orders(13, x)
        want = 2.0 / (math.pi * x)
        for order in range(13):
            w = j[order + 1] * y[order] - j[order] * y[order + 1]
            with self.subTest(order=order):
                np.testing.assert_allclose(w, want, rtol=1e-10, atol=0.0)

    def test_y_rejects_zero_argument(self) -> None:
        with self.assertRaises(SpecialFunctionDomainError):
            bessel_y(0, 0.0)

    def test_k_matches_scipy(self) -> None:
        self.assertAlmostEqual(bessel_k(0, 1.0), 0.42102443824070834, places=12)
        self.assertAlmostEqual(bessel_k(1, 1.0), 0.6019072301972346, places=12)
        for order in range(0, 6):
            for x in (0.1, 0.9, 4.0, 20.0):
                with self.subTest(order=order, x=x):
                    want = float(special.kv(order, x))
                    self.assertAlmostEqual(bessel_k(order, x), want, delta=1e-10 * want)

    def test_asymptotic_expansion_agrees_for_large_argument(self) -> None:
        for order in (0, 1, 3):
            j, y = asymptotic_jy(order, 80.0)
            self.assertAlmostEqual(j, float(special.jv(order, 80.0)), delta=1e-10)
            self.assertAlmostEqual(y, float(special.yv(order, 80.0)), delta=1e-10)


if __name__ == "__main__":
    unittest.main()
