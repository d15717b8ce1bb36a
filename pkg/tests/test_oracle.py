from __future__ import annotations

import math
import unittest

from levlab.oracle import (
    born_phase_shift,
    dense_channel_counts,
    dense_total,
    square_well_channel_counts,
    square_well_critical_depths,
    square_well_phase_shift,
    square_well_total,
)
from levlab.potentials import gaussian, square_well, zero
from levlab.radial_engine import count_bound_states, zero_energy_solutions

J01_SQ = 5.783185962946785
J11_SQ = 14.681970642123893


class ClosedFormTests(unittest.TestCase):
    def test_square_well_counts(self) -> None:
        self.assertEqual(square_well_channel_counts(1.0, 1.0, 3), [1, 0, 0, 0])
        self.assertEqual(square_well_total(1.0, 1.0, 3), 1)
        self.assertEqual(square_well_channel_counts(20.0, 1.0, 4), [2, 1, 1, 0, 0])
        self.assertEqual(square_well_total(20.0, 1.0, 4), 6)
        self.assertEqual(square_well_channel_counts(-3.0, 1.0, 2), [0, 0, 0])

    def test_critical_depths(self) -> None:
        depths = square_well_critical_depths(1.0)
        self.assertAlmostEqual(depths["p_resonance"], J01_SQ, places=10)
        self.assertAlmostEqual(depths["s_resonance"], J11_SQ, places=10)
        self.assertAlmostEqual(square_well_critical_depths(2.0)["p_resonance"], J01_SQ / 4.0, places=10)

    def test_weak_well_phase_matches_born(self) -> None:
        for ell in (0, 1, 3):
            exact = square_well_phase_shift(0.01, 1.0, ell, 100.0)
            born = born_phase_shift(square_well(0.01, 1.0), ell, 100.0)
            with self.subTest(ell=ell):
                self.assertAlmostEqual(exact, born, delta=1e-5)
        self.assertEqual(born_phase_shift(zero(), 0, 1.0), 0.0)

    def test_phase_shift_domain(self) -> None:
        with self.assertRaises(ValueError):
            square_well_phase_shift(1.0, 1.0, 0, 0.0)
        with self.assertRaises(ValueError):
            square_well_phase_shift(-5.0, 1.0, 0, 1.0)
        self.assertLess(abs(square_well_phase_shift(1.0, 1.0, 0, 2.0)), math.pi / 2 + 1e-15)


class DenseOracleTests(unittest.TestCase):
    def test_dense_counts_match_closed_form(self) -> None:
        self.assertEqual(dense_channel_counts(square_well(1.0, 1.0), 3), [1, 0, 0, 0])
        self.assertEqual(dense_channel_counts(square_well(20.0, 1.0), 4), [2, 1, 1, 0, 0])
        self.assertEqual(dense_total(square_well(20.0, 1.0), 4), 6)

    def test_barrier_and_free_have_no_bound_states(self) -> None:
        self.assertEqual(dense_channel_counts(square_well(-5.0, 1.0), 2), [0, 0, 0])
        self.assertEqual(dense_total(zero(), 3), 0)


class SturmAgreementTests(unittest.TestCase):
    def test_node_counts_match_dense_counts(self) -> None:
        potentials = [square_well(depth, 1.0) for depth in (0.5, 1.0, 3.0, 5.0, 8.0, 12.0, 20.0)]
        potentials += [gaussian(depth, 1.0) for depth in (1.0, 5.0, 12.0)]
        potentials.append(square_well(-5.0, 1.0))
        for pot in potentials:
            with self.subTest(potential=pot.kind, depth=pot.depth):
                count = count_bound_states(pot, 6)
                self.assertEqual(count.oracle_total, count.total)
                self.assertEqual(dense_total(pot, 6), count.total)

    def test_deep_gaussian_dense_counts_follow_the_nodes(self) -> None:
        pot = gaussian(12.0, 1.0)
        nodes = [s.node_count for s in zero_energy_solutions(pot, 4)]
        self.assertEqual(dense_channel_counts(pot, 4), nodes)
        self.assertGreater(sum(nodes), 0)

    def test_square_well_counts_match_closed_form(self) -> None:
        for depth in (0.5, 3.0, 8.0, 12.0):
            with self.subTest(depth=depth):
                self.assertEqual(count_bound_states(square_well(depth, 1.0), 6).total, square_well_total(depth, 1.0, 6))


if __name__ == "__main__":
    unittest.main()
