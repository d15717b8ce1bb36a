from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .util import append_jsonl, ensure_dir, utc_now_iso, write_json


@dataclass
class StageRecord:
    stage: str
    started_at: str
    completed_at: str
    duration_s: float
    status: str
    summary: str
    outputs: list[str] = field(default_factory=list)


@dataclass
class RunState:
    run_id: str
    verb: str
    started_at: str
    config_path: str
    config_sha256: str
    status: str = "running"
    completed_at: str | None = None
    stages: list[StageRecord] = field(default_factory=list)
    results: dict[str, Any] = field(default_factory=dict)
    evidence_pack: str | None = None
    reports: dict[str, str] = field(default_factory=dict)


def state_to_dict(state: RunState) -> dict[str, Any]:
    return {
        "run_id": state.run_id,
        "verb": state.verb,
        "started_at": state.started_at,
        "completed_at": state.completed_at,
        "status": state.status,
        "config_path": state.config_path,
        "config_sha256": state.config_sha256,
        "evidence_pack": state.evidence_pack,
        "reports": state.reports,
        "results": state.results,
        "stages": [
            {
                "stage": st.stage,
                "started_at": st.started_at,
                "completed_at": st.completed_at,
                "duration_s": st.duration_s,
                "status": st.status,
                "summary": st.summary,
                "outputs": st.outputs,
            }
            for st in state.stages
        ],
    }


class RunRecorder:
    def __init__(self, run_dir: Path, state: RunState) -> None:
        self.run_dir = run_dir
        self.state_path = run_dir / "state.json"
        self.trace_path = run_dir / "trace.jsonl"
        self.state = state
        ensure_dir(run_dir)

    def save_state(self) -> None:
        write_json(self.state_path, state_to_dict(self.state))

    def trace(self, event: str, payload: dict[str, Any] | None = None) -> None:
        append_jsonl(
            self.trace_path,
            {
                "timestamp": utc_now_iso(),
                "event": event,
                "payload": payload or {},
            },
        )
