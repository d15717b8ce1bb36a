from __future__ import annotations

import math
import unittest

import numpy as np

from levlab.config import EngineConfig
from levlab.models import ExteriorFitError, GridRefinementError, GridSpec
from levlab.oracle import born_phase_shift, square_well_phase_shift
from levlab.potentials import gaussian, plane_moment, square_well, zero
from levlab.radial_engine import (
    born_tail,
    build_phase_table,
    classify_threshold,
    continue_branch,
    count_bound_states,
    exterior_coefficients,
    fit_exterior,
    grid_convergence_gap,
    integrate_channel,
    p_dim_from_thresholds,
    phase_shift,
    step_budget,
    threshold_kind,
    wrap_branch,
    zero_energy_solutions,
)

J01_SQ = 5.783185962946785
J11_SQ = 14.681970642123893


class PhaseShiftTests(unittest.TestCase):
    def test_square_well_matches_bessel_matching(self) -> None:
        pot = square_well(1.0, 1.0)
        for ell in (0, 1, 2, 5):
            for lam in (0.01, 0.7, 2.0, 30.0):
                with self.subTest(ell=ell, lam=lam):
                    got = phase_shift(pot, ell, lam)
                    want = square_well_phase_shift(1.0, 1.0, ell, lam)
                    self.assertLess(abs(wrap_branch(got - want)), 1e-6)

    def test_deep_well_matches_bessel_matching(self) -> None:
        pot = square_well(20.0, 1.0)
        for ell in (0, 1, 3):
            got = phase_shift(pot, ell, 3.0)
            want = square_well_phase_shift(20.0, 1.0, ell, 3.0)
            self.assertLess(abs(wrap_branch(got - want)), 1e-6)

    def test_free_potential_has_zero_phase(self) -> None:
        self.assertEqual(phase_shift(zero(), 3, 5.0), 0.0)
        table = build_phase_table(zero(), 4, GridSpec(1e-3, 1e2, 64))
        self.assertFalse(np.any(table.deltas))
        self.assertFalse(np.any(table.tail))

    def test_rejects_non_positive_energy(self) -> None:
        with self.assertRaises(ValueError):
            phase_shift(square_well(1.0, 1.0), 0, 0.0)
        with self.assertRaises(ValueError):
            integrate_channel(square_well(1.0, 1.0), 0, -1.0)


class BranchTests(unittest.TestCase):
    def test_wrap_branch_interval(self) -> None:
        self.assertAlmostEqual(wrap_branch(math.pi), 0.0, places=15)
        self.assertAlmostEqual(wrap_branch(0.6 * math.pi), -0.4 * math.pi, places=14)
        self.assertAlmostEqual(wrap_branch(0.5 * math.pi), 0.5 * math.pi, places=14)

    def test_continue_branch_recovers_slow_phase(self) -> None:
        true = np.linspace(3.5, 0.2, 50)
        np.testing.assert_allclose(continue_branch(wrap_branch(true)), true, atol=1e-12)

    def test_table_is_branch_continuous(self) -> None:
        table = build_phase_table(square_well(1.0, 1.0), 3, GridSpec(1e-6, 1e2, 64))
        self.assertEqual(table.deltas.shape, (4, table.lambdas.size))
        self.assertTrue(np.all(np.diff(table.lambdas) > 0))
        self.assertLessEqual(float(np.max(np.abs(np.diff(table.deltas, axis=1)))), math.pi / 4)
        # one s-wave bound state: delta_0 starts near pi and ends near 0
        self.assertLess(abs(table.deltas[0, 0] - math.pi), 0.6)
        self.assertLess(abs(table.deltas[0, -1]), 0.2)

    def test_refinement_inserts_points_and_respects_budget(self) -> None:
        pot = square_well(400.0, 1.0)
        grid = GridSpec(1e-2, 1e3, 64)
        table = build_phase_table(pot, 2, grid, max_points=4096)
        self.assertGreater(table.refined_points, 0)
        self.assertEqual(table.lambdas.size, 64 + table.refined_points)
        jumps = np.abs(wrap_branch(np.diff(table.deltas, axis=1)))
        self.assertLessEqual(float(jumps.max()), math.pi / 4)
        with self.assertRaises(GridRefinementError):
            build_phase_table(pot, 2, grid, max_points=64)

    def test_doubling_the_grid_leaves_shared_nodes_unchanged(self) -> None:
        grid = GridSpec(1e-4, 1e2, 65)
        for pot in (square_well(3.0, 1.0), gaussian(5.0, 1.0)):
            with self.subTest(potential=pot.kind):
                self.assertLess(grid_convergence_gap(pot, 4, grid), 1e-6)

    def test_parallel_table_is_identical(self) -> None:
        pot = square_well(3.0, 1.0)
        grid = GridSpec(1e-3, 1e2, 64)
        serial = build_phase_table(pot, 3, grid)
        threaded = build_phase_table(pot, 3, grid, workers=3)
        np.testing.assert_array_equal(serial.deltas, threaded.deltas)


class BornTailTests(unittest.TestCase):
    def test_square_well_tail_matches_quadrature(self) -> None:
        pot = square_well(1.0, 1.0)
        lam = 4.0
        want = sum(2.0 * born_phase_shift(pot, ell, lam) for ell in range(3, 40))
        got = float(born_tail(pot, 2, np.array([lam]))[0])
        self.assertAlmostEqual(got, want, delta=1e-9)

    def test_gaussian_tail_matches_quadrature(self) -> None:
        pot = gaussian(1.0, 1.0)
        lam = 2.0
        want = sum(2.0 * born_phase_shift(pot, ell, lam) for ell in range(2, 40))
        got = float(born_tail(pot, 1, np.array([lam]))[0])
        self.assertAlmostEqual(got, want, delta=1e-8)

    def test_born_sum_over_all_channels_is_moment_limit(self) -> None:
        pot = square_well(2.0, 1.0)
        lam = 50.0
        total = float(born_tail(pot, 0, np.array([lam]))[0]) + born_phase_shift(pot, 0, lam)
        self.assertAlmostEqual(total, -0.25 * plane_moment(pot), places=9)


class ZeroEnergyTests(unittest.TestCase):
    def test_counts_match_closed_form(self) -> None:
        pot = square_well(20.0, 1.0)
        count = count_bound_states(pot, 4)
        self.assertEqual(count.per_channel, [2, 1, 1, 0, 0])
        self.assertEqual(count.total, 6)
        self.assertEqual(count.oracle_total, 6)

    def test_shallow_well_has_one_bound_state(self) -> None:
        sols = zero_energy_solutions(square_well(1.0, 1.0), 3)
        self.assertEqual([s.node_count for s in sols], [1, 0, 0, 0])
        # the only node of the s-wave lies beyond the well
        self.assertTrue(sols[0].exterior_node)
        self.assertEqual(sols[0].interior_nodes, 0)

    def test_p_resonance_at_first_zero_of_j0(self) -> None:
        pot = square_well(J01_SQ, 1.0)
        classes = classify_threshold(pot, 3)
        self.assertEqual([c.kind for c in classes], ["regular", "p_resonance", "regular", "regular"])
        self.assertEqual(p_dim_from_thresholds(classes), 2)
        count = count_bound_states(pot, 3)
        self.assertEqual(count.total, 1)
        self.assertIsNone(count.oracle_total)

    def test_s_resonance_and_zero_eigenvalue_at_first_zero_of_j1(self) -> None:
        pot = square_well(J11_SQ, 1.0)
        classes = classify_threshold(pot, 3)
        self.assertEqual(classes[0].kind, "s_resonance")
        self.assertEqual(classes[2].kind, "zero_eigenvalue")
        self.assertEqual(p_dim_from_thresholds(classes), 0)
        count = count_bound_states(pot, 3)
        self.assertEqual(count.per_channel[:3], [1, 1, 0])
        self.assertEqual(count.zero_energy, [False, False, True, False])
        self.assertEqual(count.total, 5)

    def test_threshold_kind_by_channel(self) -> None:
        self.assertEqual(threshold_kind(0), "s_resonance")
        self.assertEqual(threshold_kind(1), "p_resonance")
        self.assertEqual(threshold_kind(4), "zero_eigenvalue")

    def test_step_budget_grows_with_energy(self) -> None:
        pot = square_well(1.0, 1.0)
        low = step_budget(pot, 0, 1.0, EngineConfig())
        high = step_budget(pot, 0, 1e4, EngineConfig())
        self.assertGreater(low, 0)
        self.assertGreater(high, low)


class ExteriorFitTests(unittest.TestCase):
    def test_two_radius_fit_recovers_closed_form_coefficients(self) -> None:
        for ell in range(13):
            for value, slope in ((1.0, -0.3), (0.2, 1.7), (-0.8, 0.8 * ell)):
                with self.subTest(ell=ell, value=value, slope=slope):
                    grow, decay, cond = fit_exterior(ell, value, slope)
                    want_grow, want_decay = exterior_coefficients(ell, value, slope)
                    self.assertAlmostEqual(grow, want_grow, delta=1e-8)
                    self.assertAlmostEqual(decay, want_decay, delta=1e-8)
                    self.assertTrue(math.isfinite(cond))
                    self.assertGreater(cond, 1.0)
                    self.assertLess(cond, 1e8)

    def test_condition_number_reflects_radius_separation(self) -> None:
        _, _, wide = fit_exterior(1, 1.0, -0.3, ratio=4.0)
        _, _, narrow = fit_exterior(1, 1.0, -0.3, ratio=1.01)
        self.assertGreater(narrow, wide)
        with self.assertRaises(ExteriorFitError):
            fit_exterior(1, 1.0, -0.3, ratio=1.0 + 1e-10)
        with self.assertRaises(ExteriorFitError):
            fit_exterior(0, 1.0, -0.3, ratio=1.0 + 1e-10)
        with self.assertRaises(ValueError):
            fit_exterior(2, 1.0, 0.0, ratio=1.0)


if __name__ == "__main__":
    unittest.main()
