from __future__ import annotations

import tempfile
import unittest
from pathlib import Path

from levlab.config import build_config, load_config
from levlab.doctor import format_doctor_report, run_doctor


class DoctorTests(unittest.TestCase):
    def test_doctor_ok_for_valid_project(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            (root / "levlab.toml").write_text(
                """[project]
name = "doctor-ok"

[potential]
kind = "gaussian"
depth = 2.0
range = 1.0

[grid]
lambda_min = 1e-5
lambda_max = 1e3
count = 512
""",
                encoding="utf-8",
            )
            report = run_doctor(load_config(root / "levlab.toml"))
            self.assertTrue(report.ok)
            self.assertEqual(report.warnings, [])
            self.assertGreater(report.estimated_steps, 0)
            self.assertTrue(any(msg.startswith("plane_moment=") for msg in report.infos))
            text = format_doctor_report(report)
            self.assertIn("ok=true", text)
            self.assertIn("[info]", text)

    def test_doctor_reports_missing_table(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            cfg = build_config({"potential": {"kind": "tabulated", "table": "nope.txt"}}, base=root)
            report = run_doctor(cfg)
            self.assertFalse(report.ok)
            self.assertIn("Missing potential table", report.errors[0])

    def test_doctor_rejects_short_grid(self) -> None:
        cfg = build_config({"grid": {"lambda_min": 0.1, "lambda_max": 10.0, "count": 64}}, base=Path(tempfile.gettempdir()))
        report = run_doctor(cfg)
        self.assertFalse(report.ok)
        self.assertTrue(any("decades" in msg for msg in report.errors))

    def test_doctor_warnings(self) -> None:
        base = Path(tempfile.gettempdir())
        near = run_doctor(build_config({"potential": {"depth": 5.785}}, base=base))
        self.assertTrue(near.ok)
        self.assertTrue(any("p-resonance" in msg for msg in near.warnings))

        shifted = run_doctor(build_config({"grid": {"lambda_min": 2.0, "lambda_max": 1e4}}, base=base))
        self.assertTrue(any("lambda = 1" in msg for msg in shifted.warnings))

        untailed = run_doctor(build_config({"channels": {"l_max": 2, "born_tail": False}}, base=base))
        self.assertTrue(any("Born tail" in msg for msg in untailed.warnings))

    def test_doctor_warns_on_zero_moment_table(self) -> None:
        with tempfile.TemporaryDirectory() as td:
            root = Path(td)
            (root / "flat.txt").write_text("0.0 0.0\n0.5 0.0\n1.0 0.0\n1.5 0.0\n", encoding="utf-8")
            cfg = build_config({"potential": {"kind": "tabulated", "table": "flat.txt"}}, base=root)
            report = run_doctor(cfg)
            self.assertTrue(report.ok)
            self.assertTrue(any("--explore" in msg for msg in report.warnings))


if __name__ == "__main__":
    unittest.main()
