from __future__ import annotations

import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from levlab.config import PotentialConfig
from levlab.potentials import (
    build_potential,
    depth_scale,
    describe,
    evaluate,
    gaussian,
    load_table,
    plane_moment,
    square_well,
    tabulated,
    with_depth,
    zero,
)


class PotentialTests(unittest.TestCase):
    def test_square_well_values_and_moment(self) -> None:
        pot = square_well(2.0, 1.5)
        self.assertEqual(evaluate(pot, 0.0), -2.0)
        self.assertEqual(evaluate(pot, 1.5), -2.0)
        self.assertEqual(evaluate(pot, 1.6), 0.0)
        np.testing.assert_allclose(evaluate(pot, np.array([0.5, 3.0])), [-2.0, 0.0])
        self.assertAlmostEqual(plane_moment(pot), -math.pi * 2.0 * 1.5**2, places=14)

    def test_barrier_has_positive_moment(self) -> None:
        pot = square_well(-1.0, 1.0)
        self.assertEqual(evaluate(pot, 0.5), 1.0)
        self.assertGreater(plane_moment(pot), 0.0)

    def test_gaussian_moment_includes_cutoff(self) -> None:
        pot = gaussian(1.0, 1.0)
        self.assertEqual(pot.cutoff_radius, 8.0)
        self.assertAlmostEqual(plane_moment(pot), -math.pi * (1.0 - math.exp(-64.0)), places=14)
        self.assertEqual(evaluate(pot, 8.5), 0.0)
        self.assertAlmostEqual(evaluate(pot, 1.0), -math.exp(-1.0), places=15)

    def test_free_potential_short_circuits(self) -> None:
        pot = build_potential(PotentialConfig(kind="square_well", depth=0.0))
        self.assertTrue(pot.is_free)
        self.assertEqual(plane_moment(pot), 0.0)
        self.assertEqual(evaluate(pot, 0.3), 0.0)
        self.assertEqual(depth_scale(pot), 1.0)
        self.assertEqual(describe(pot), {"kind": "free"})
        self.assertTrue(zero().is_free)

    def test_tabulated_profile_moment(self) -> None:
        # smooth profile vanishing at the last sample
        r = np.linspace(0.0, 2.0, 401)
        v = -(1.0 - (r / 2.0) ** 2) ** 2
        pot = tabulated(r, v)
        want = -2.0 * math.pi * (2.0**2 / 6.0)
        self.assertAlmostEqual(plane_moment(pot), want, delta=1e-5)
        self.assertEqual(pot.depth, 1.0)
        self.assertEqual(evaluate(pot, 2.5), 0.0)

    def test_tabulated_rejects_bad_tables(self) -> None:
        r = np.linspace(0.0, 1.0, 10)
        with self.assertRaises(ValueError):
            tabulated(r, -np.ones(10))
        with self.assertRaises(ValueError):
            tabulated(r[::-1], np.zeros(10))
        with self.assertRaises(ValueError):
            tabulated(r[:3], np.zeros(3))
        with self.assertRaises(ValueError):
            square_well(1.0, 0.0)
        with self.assertRaises(ValueError):
            gaussian(1.0, -1.0)

    def test_load_table_from_file(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            path = Path(td) / "well.dat"
            rows = ["# r V"] + [f"{x:.6f} {-(1.0 - x) ** 2:.12f}" for x in np.linspace(0.0, 1.0, 50)]
            path.write_text("\n".join(rows) + "\n", encoding="utf-8")
            pot = load_table(path)
            self.assertEqual(pot.kind, "tabulated")
            self.assertEqual(describe(pot)["samples"], 50)
            self.assertAlmostEqual(plane_moment(pot), -2.0 * math.pi / 12.0, delta=1e-4)

            bad = Path(td) / "bad.dat"
            bad.write_text("0 1 2\n1 2 3\n", encoding="utf-8")
            with self.assertRaises(ValueError):
                load_table(bad)

    def test_with_depth_rescales(self) -> None:
        base = square_well(1.0, 1.0)
        deeper = with_depth(base, 5.0)
        self.assertEqual(deeper.depth, 5.0)
        self.assertEqual(deeper.range, 1.0)
        self.assertTrue(with_depth(base, 0.0).is_free)

        r = np.linspace(0.0, 1.0, 20)
        table = tabulated(r, -(1.0 - r) * 2.0)
        scaled = with_depth(table, 4.0)
        self.assertAlmostEqual(plane_moment(scaled), 2.0 * plane_moment(table), places=10)


if __name__ == "__main__":
    unittest.main()
