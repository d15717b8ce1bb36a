from __future__ import annotations

import json
import tempfile
import unittest
from pathlib import Path

from levlab.config import RunConfig, build_config
from levlab.pipeline import (
    finish_run,
    open_run,
    run_bound_states,
    run_lemmas,
    run_phase_shifts,
    run_sweep,
    run_thresholds,
)
from levlab.threshold_algebra import LEMMA_TOLERANCES

J01_SQ = 5.783185962946785


def _config(root: Path, **sections: dict) -> RunConfig:
    raw = {
        "project": {"name": "Pipeline Unit"},
        "potential": {"kind": "square_well", "depth": 1.0, "range": 1.0},
        "channels": {"l_max": 3},
        "grid": {"lambda_min": 1e-4, "lambda_max": 1e2, "count": 64},
        "output": {"directory": "out"},
    }
    raw.update(sections)
    return build_config(raw, base=root)


class RunDirectoryTests(unittest.TestCase):
    def test_phase_shift_run_records_state_and_reports(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root)
            ctx = open_run(cfg, "phase-shifts")
            self.assertEqual(ctx.run_dir, (root / "out").resolve())
            self.assertTrue(ctx.state.run_id.startswith("pipeline-unit-"))

            table, csv_path = run_phase_shifts(ctx)
            state = finish_run(ctx, "pass")
            self.assertEqual(state.status, "pass")

            lines = csv_path.read_text(encoding="utf-8").splitlines()
            self.assertTrue(lines[0].startswith("# levlab phase-shifts config_sha256="))
            self.assertEqual(lines[1], "lambda,delta_l0,delta_l1,delta_l2,delta_l3")
            self.assertEqual(len(lines) - 2, table.lambdas.size)

            saved = json.loads((ctx.run_dir / "state.json").read_text(encoding="utf-8"))
            self.assertEqual(saved["status"], "pass")
            self.assertEqual([st["stage"] for st in saved["stages"]], ["phase_table"])
            self.assertEqual(saved["results"]["points"], table.lambdas.size)

            events = [
                json.loads(line)["event"]
                for line in (ctx.run_dir / "trace.jsonl").read_text(encoding="utf-8").splitlines()
            ]
            self.assertEqual(events[0], "run_started")
            self.assertIn("table_built", events)
            self.assertEqual(events[-1], "run_completed")

            gate = json.loads((ctx.run_dir / "report" / "gate_verdict.json").read_text(encoding="utf-8"))
            self.assertTrue(gate["passed"])
            self.assertTrue((ctx.run_dir / "report" / "summary.md").exists())

    def test_rerun_produces_identical_tables(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root)
            _, first = run_phase_shifts(open_run(cfg, "phase-shifts", root / "a"))
            _, second = run_phase_shifts(open_run(cfg, "phase-shifts", root / "b"))
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_bound_state_and_threshold_outputs(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            ctx = open_run(_config(root, potential={"kind": "square_well", "depth": 20.0}), "bound-states")
            count = run_bound_states(ctx)
            self.assertEqual(count.total, 6)
            payload = json.loads((ctx.run_dir / "bound_states.json").read_text(encoding="utf-8"))
            self.assertEqual(payload["per_channel"], [2, 1, 1, 0])
            self.assertEqual(payload["oracle_total"], 6)

            classes, p_proj = run_thresholds(ctx)
            self.assertTrue(all(c.kind == "regular" for c in classes))
            self.assertEqual(p_proj.dim, 0)
            self.assertTrue((ctx.run_dir / "thresholds.json").exists())


class SweepTests(unittest.TestCase):
    def test_sweep_locates_p_resonance_crossing(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root, sweep={"depth_min": 5.0, "depth_max": 6.5, "points": 4})
            ctx = open_run(cfg, "sweep")
            payload = run_sweep(ctx)
            self.assertEqual(len(payload["points"]), 4)
            self.assertTrue(payload["monotone"])
            self.assertEqual(len(payload["crossings"]), 1)
            crossing = payload["crossings"][0]
            self.assertAlmostEqual(crossing["critical_depth"], J01_SQ, delta=1e-4)
            self.assertEqual(crossing["channel"], 1)
            self.assertEqual(crossing["type"], "p_resonance")
            self.assertEqual(crossing["p_dim_jump"], 2)
            self.assertTrue((ctx.run_dir / "sweep.json").exists())

    def test_shallow_sweep_has_no_crossings(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root, sweep={"depth_min": 0.5, "depth_max": 1.0, "points": 3})
            payload = run_sweep(open_run(cfg, "sweep"))
            self.assertEqual(payload["crossings"], [])
            self.assertEqual([p["sigma_p"] for p in payload["points"]], [1, 1, 1])

    def test_sweep_needs_depth_range(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            ctx = open_run(_config(Path(td)), "sweep")
            with self.assertRaises(ValueError):
                run_sweep(ctx)

    def test_erroring_points_fail_the_sweep_gate(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            # two decades of grid cannot reach the zero-energy limit
            cfg = _config(
                root,
                grid={"lambda_min": 1e-2, "lambda_max": 1.0, "count": 64},
                sweep={"depth_min": 0.5, "depth_max": 1.0, "points": 2},
            )
            ctx = open_run(cfg, "sweep")
            payload = run_sweep(ctx)
            self.assertEqual(payload["errors"], 2)
            self.assertEqual(payload["failed"], 2)
            self.assertTrue(all(p["status"] == "error" for p in payload["points"]))
            finish_run(ctx, "fail")
            gate = json.loads((ctx.run_dir / "report" / "gate_verdict.json").read_text(encoding="utf-8"))
            self.assertFalse(gate["checks"]["sweep_passed"])
            self.assertFalse(gate["passed"])


class CheckTests(unittest.TestCase):
    def test_grid_convergence_is_recorded_and_gated(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root, grid={"lambda_min": 1e-4, "lambda_max": 1e2, "count": 64, "check_convergence": True})
            ctx = open_run(cfg, "phase-shifts")
            run_phase_shifts(ctx)
            gap = ctx.state.results["grid_convergence_gap"]
            self.assertGreaterEqual(gap, 0.0)
            finish_run(ctx, "pass")
            saved = json.loads((ctx.run_dir / "state.json").read_text(encoding="utf-8"))
            self.assertEqual([st["stage"] for st in saved["stages"]], ["phase_table", "grid_convergence"])
            gate = json.loads((ctx.run_dir / "report" / "gate_verdict.json").read_text(encoding="utf-8"))
            self.assertEqual(gate["checks"]["grid_converged"], gap < cfg.tolerances.grid_convergence)
            self.assertEqual(gate["policy"]["grid_convergence"], cfg.tolerances.grid_convergence)

    def test_lemmas_are_reproducible_from_the_seed(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = _config(root, run={"seed": 11})
            first = run_lemmas(open_run(cfg, "lemmas", root / "a"))
            second = run_lemmas(open_run(cfg, "lemmas", root / "b"))
            self.assertEqual(first, second)
            for key, limit in LEMMA_TOLERANCES.items():
                self.assertLess(first[key], limit)
            saved = json.loads((root / "a" / "lemmas.json").read_text(encoding="utf-8"))
            self.assertEqual(saved["seed"], 11)


if __name__ == "__main__":
    unittest.main()
