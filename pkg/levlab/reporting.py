from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .config import ToleranceConfig
from .run_state import RunState, state_to_dict
from .util import utc_now_iso, write_json

FINISHED = {"pass", "fail", "near_threshold", "exploratory"}


def summarize_state_dict(state: dict[str, Any]) -> dict[str, Any]:
    stages = list(state.get("stages", []))
    total_duration_s = sum(float(st.get("duration_s", 0.0) or 0.0) for st in stages)
    summary = {
        "generated_at": utc_now_iso(),
        "run_id": state.get("run_id"),
        "verb": state.get("verb"),
        "status": state.get("status"),
        "started_at": state.get("started_at"),
        "completed_at": state.get("completed_at"),
        "config_sha256": state.get("config_sha256"),
        "stages": len(stages),
        "failed_stages": [st.get("stage") for st in stages if st.get("status") == "error"],
        "total_duration_s": round(total_duration_s, 3),
        "evidence_pack": state.get("evidence_pack"),
    }
    summary.update(state.get("results", {}))
    return summary


def build_gate_verdict(summary: dict[str, Any], tolerances: ToleranceConfig | None = None) -> dict[str, Any]:
    """Checks whose inputs are present in the summary; a verb only gates what it computed."""
    tol = tolerances or ToleranceConfig()
    checks: dict[str, bool] = {"run_completed": summary.get("status") in FINISHED}
    if summary.get("residual") is not None and summary.get("status") != "exploratory":
        limit = tol.corollary if summary.get("critical") else tol.residual
        checks["identity_residual"] = float(summary["residual"]) < limit
    if summary.get("corollary_holds") is not None:
        checks["corollary"] = bool(summary["corollary_holds"])
    if summary.get("hexagon_winding") is not None and summary.get("sigma_p") is not None:
        checks["hexagon_matches_bound_states"] = int(summary["hexagon_winding"]) == int(summary["sigma_p"])
    if summary.get("det_agreement") is not None:
        checks["determinant_agreement"] = float(summary["det_agreement"]) < tol.unitarity
    if summary.get("vertex_gap") is not None:
        checks["vertex_continuity"] = float(summary["vertex_gap"]) < tol.vertex
    if summary.get("unitarity_defect") is not None:
        checks["unitarity"] = float(summary["unitarity_defect"]) < tol.unitarity
    if summary.get("grid_convergence_gap") is not None:
        checks["grid_converged"] = float(summary["grid_convergence_gap"]) < tol.grid_convergence
    if summary.get("lemmas_passed") is not None:
        checks["lemmas"] = bool(summary["lemmas_passed"])
    if summary.get("oracle_total") is not None and summary.get("sigma_p") is not None:
        checks["oracle_agrees"] = int(summary["oracle_total"]) == int(summary["sigma_p"])
    if summary.get("sweep_points"):
        checks["sweep_passed"] = int(summary.get("sweep_failed", 0)) == 0
    return {
        "generated_at": utc_now_iso(),
        "run_id": summary.get("run_id"),
        "passed": all(checks.values()),
        "checks": checks,
        "policy": {
            "residual": tol.residual,
            "corollary": tol.corollary,
            "unitarity": tol.unitarity,
            "vertex": tol.vertex,
            "grid_convergence": tol.grid_convergence,
        },
    }


def write_run_report(
    run_dir: Path,
    state: RunState,
    tolerances: ToleranceConfig | None = None,
) -> tuple[Path, Path, Path]:
    run_dir = run_dir.resolve()
    report_dir = run_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)

    state_dict = state_to_dict(state)
    summary = summarize_state_dict(state_dict)
    gate = build_gate_verdict(summary, tolerances)

    json_path = report_dir / "summary.json"
    md_path = report_dir / "summary.md"
    gate_path = report_dir / "gate_verdict.json"

    write_json(json_path, summary)
    write_json(gate_path, gate)
    md_path.write_text(_render_markdown(summary, state_dict, gate), encoding="utf-8")
    return json_path, md_path, gate_path


def load_gate_verdict(run_dir: Path) -> dict[str, Any] | None:
    gate_path = run_dir.resolve() / "report" / "gate_verdict.json"
    if not gate_path.exists():
        return None
    try:
        return json.loads(gate_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None


def _render_markdown(summary: dict[str, Any], state: dict[str, Any], gate: dict[str, Any]) -> str:
    lines: list[str] = []
    lines.append("# levlab Run Summary")
    lines.append("")
    lines.append(f"- Run ID: `{summary.get('run_id')}`")
    lines.append(f"- Verb: `{summary.get('verb')}`")
    lines.append(f"- Status: `{summary.get('status')}`")
    lines.append(f"- Duration (s): `{summary.get('total_duration_s')}`")
    for key in ("sigma_p", "p_dim", "winding_term", "moment_term", "residual", "hexagon_winding", "crossings"):
        if summary.get(key) is not None:
            lines.append(f"- {key}: `{summary.get(key)}`")
    lines.append("")

    lines.append("## Gate Verdict")
    lines.append("")
    lines.append(f"- Passed: `{gate.get('passed')}`")
    for key, value in gate.get("checks", {}).items():
        lines.append(f"- `{key}`: `{value}`")
    lines.append("")

    lines.append("## Stages")
    lines.append("")
    lines.append("| Stage | Status | Duration (s) | Summary |")
    lines.append("| --- | --- | --- | --- |")
    for item in state.get("stages", []):
        text = str(item.get("summary", "")).replace("|", "\\|")
        lines.append(f"| {item.get('stage')} | {item.get('status')} | {item.get('duration_s', 0.0)} | {text} |")
    lines.append("")

    evidence_pack = summary.get("evidence_pack")
    if evidence_pack:
        lines.append(f"Evidence pack: `{evidence_pack}`")

    return "\n".join(lines) + "\n"
