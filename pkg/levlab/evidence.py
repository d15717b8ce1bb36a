from __future__ import annotations

import json
import tarfile
from pathlib import Path
from typing import Any

from .reporting import load_gate_verdict
from .util import gather_runtime_facts, sha256_file, utc_now_iso, write_json


def build_evidence_pack(run_dir: Path, config_path: Path | None, output_path: Path | None = None) -> Path:
    """Hash every file of a run directory into evidence/manifest.json and pack it as tar.gz."""
    run_dir = run_dir.resolve()
    evidence_dir = run_dir / "evidence"
    evidence_dir.mkdir(parents=True, exist_ok=True)

    state = read_state(run_dir)
    run_id = state.get("run_id") or run_dir.name
    out = (output_path or (evidence_dir / f"levlab-evidence-{run_id}.tar.gz")).resolve()

    manifest = _build_manifest(run_dir=run_dir, config_path=config_path, state=state, skip=out)
    write_json(evidence_dir / "manifest.json", manifest)

    with tarfile.open(out, "w:gz") as tar:
        for path in sorted(run_dir.rglob("*")):
            if path == out or path.is_dir():
                continue
            tar.add(path, arcname=str(path.relative_to(run_dir)))

    return out


def _build_manifest(run_dir: Path, config_path: Path | None, state: dict[str, Any], skip: Path) -> dict[str, Any]:
    files: list[dict[str, str | int]] = []
    for path in sorted(run_dir.rglob("*")):
        if path.is_dir() or path == skip or path.name == "manifest.json":
            continue
        files.append(
            {
                "path": str(path.relative_to(run_dir)),
                "sha256": sha256_file(path),
                "size": path.stat().st_size,
            }
        )

    config_file_digest = sha256_file(config_path) if config_path is not None and config_path.exists() else None
    return {
        "generated_at": utc_now_iso(),
        "run_dir": str(run_dir),
        "run_id": state.get("run_id"),
        "config_path": str(config_path) if config_path is not None else None,
        "config_file_sha256": config_file_digest,
        "config_sha256": state.get("config_sha256"),
        "runtime": gather_runtime_facts(),
        "gate_verdict": load_gate_verdict(run_dir),
        "files": files,
    }


def read_state(run_dir: Path) -> dict[str, Any]:
    state_path = run_dir / "state.json"
    if not state_path.exists():
        return {}
    return json.loads(state_path.read_text(encoding="utf-8"))
