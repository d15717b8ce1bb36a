"""Orchestration of the CLI verbs: one run directory, staged work, ordered outputs."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from .config import RunConfig, config_digest
from .hexagon_symbol import hexagon_winding, trace_rows
from .levinson import Regularizer, build_ssf, report_to_json, resolve_p_projection, scaled_grid, verify_identity
from .models import (
    HexagonTrace,
    LevinsonReport,
    LevlabError,
    PhaseShiftTable,
    PPProjection,
    SpectralCount,
    ThresholdClass,
)
from .potentials import RadialPotential, build_potential, describe, plane_moment, with_depth
from .radial_engine import (
    build_phase_table,
    classify_threshold,
    count_bound_states,
    grid_convergence_gap,
    threshold_kind,
    zero_energy_solutions,
)
from .reporting import write_run_report
from .run_state import RunRecorder, RunState, StageRecord
from .threshold_algebra import LEMMA_TOLERANCES, lemma_suite
from .util import ensure_dir, ordered_map, utc_now_iso, write_csv, write_json

logger = logging.getLogger(__name__)

BISECTION_RTOL = 1e-7
BISECTION_MAX_STEPS = 60


@dataclass
class RunContext:
    config: RunConfig
    potential: RadialPotential
    run_dir: Path
    digest: str
    recorder: RunRecorder

    @property
    def state(self) -> RunState:
        return self.recorder.state


def _run_id(name: str, digest: str) -> str:
    safe = "".join(ch if ch.isalnum() else "-" for ch in name.lower()).strip("-") or "run"
    return f"{safe}-{digest[:12]}"


def open_run(config: RunConfig, verb: str, out_dir: Path | None = None) -> RunContext:
    potential = build_potential(config.potential)
    digest = config_digest(config)
    run_dir = ensure_dir((out_dir or config.output.directory).resolve())
    state = RunState(
        run_id=_run_id(config.name, digest),
        verb=verb,
        started_at=utc_now_iso(),
        config_path=str(config.config_path),
        config_sha256=digest,
    )
    recorder = RunRecorder(run_dir=run_dir, state=state)
    recorder.save_state()
    recorder.trace(
        "run_started",
        {
            "run_id": state.run_id,
            "verb": verb,
            "potential": describe(potential),
            "l_max": config.channels.l_max,
            "workers": config.run.workers,
            "seed": config.run.seed,
        },
    )
    return RunContext(config=config, potential=potential, run_dir=run_dir, digest=digest, recorder=recorder)


@contextmanager
def stage(ctx: RunContext, name: str) -> Iterator[StageRecord]:
    record = StageRecord(stage=name, started_at=utc_now_iso(), completed_at="", duration_s=0.0, status="running", summary="")
    t0 = time.perf_counter()
    try:
        yield record
    except Exception as exc:
        record.status = "error"
        record.summary = str(exc)
        raise
    else:
        if record.status == "running":
            record.status = "ok"
    finally:
        record.completed_at = utc_now_iso()
        record.duration_s = round(time.perf_counter() - t0, 3)
        ctx.state.stages.append(record)
        ctx.recorder.trace(
            "stage_completed",
            {"stage": name, "status": record.status, "duration_s": record.duration_s, "summary": record.summary},
        )
        ctx.recorder.save_state()


def finish_run(ctx: RunContext, status: str) -> RunState:
    state = ctx.state
    state.status = status
    state.completed_at = utc_now_iso()
    json_path, md_path, gate_path = write_run_report(ctx.run_dir, state, ctx.config.tolerances)
    state.reports = {"json": str(json_path), "markdown": str(md_path), "gate": str(gate_path)}
    ctx.recorder.trace("run_completed", {"status": status})
    ctx.recorder.save_state()
    return state


def _meta(ctx: RunContext, verb: str, **extra: Any) -> str:
    parts = [f"levlab {verb}", f"config_sha256={ctx.digest}"]
    parts.extend(f"{key}={value}" for key, value in extra.items())
    return " ".join(parts)


def build_table(ctx: RunContext) -> PhaseShiftTable:
    cfg = ctx.config
    with stage(ctx, "phase_table") as rec:
        table = build_phase_table(
            ctx.potential,
            cfg.channels.l_max,
            scaled_grid(ctx.potential, cfg),
            cfg.engine,
            max_points=cfg.grid.max_points,
            include_tail=cfg.channels.born_tail,
            workers=cfg.run.workers,
        )
        rec.summary = f"{table.lambdas.size} points ({table.refined_points} refined)"
    ctx.recorder.trace(
        "table_built",
        {"points": int(table.lambdas.size), "refined_points": table.refined_points, "l_max": table.l_max},
    )
    return table


def run_phase_shifts(ctx: RunContext) -> tuple[PhaseShiftTable, Path | None]:
    table = build_table(ctx)
    out: Path | None = None
    if ctx.config.output.csv:
        out = ctx.run_dir / "phase_shifts.csv"
        header = ["lambda"] + [f"delta_l{ell}" for ell in range(table.l_max + 1)]
        rows = ([lam, *table.deltas[:, i]] for i, lam in enumerate(table.lambdas))
        write_csv(out, _meta(ctx, "phase-shifts", l_max=table.l_max), header, rows)
    if ctx.config.output.json:
        write_json(
            ctx.run_dir / "phase_shifts.json",
            {
                "grid": asdict(table.grid),
                "points": int(table.lambdas.size),
                "refined_points": table.refined_points,
                "tail_at_lambda_min": float(table.tail[0]),
                "tail_at_lambda_max": float(table.tail[-1]),
            },
        )
    ctx.state.results.update(points=int(table.lambdas.size), refined_points=table.refined_points)
    if ctx.config.grid.check_convergence:
        cfg = ctx.config
        with stage(ctx, "grid_convergence") as rec:
            gap = grid_convergence_gap(
                ctx.potential,
                cfg.channels.l_max,
                scaled_grid(ctx.potential, cfg),
                cfg.engine,
                max_points=cfg.grid.max_points,
                workers=cfg.run.workers,
            )
            rec.summary = f"max phase change {gap:.3e} on doubling"
        ctx.state.results.update(grid_convergence_gap=gap)
    return table, out


def run_lemmas(ctx: RunContext) -> dict[str, float]:
    """Randomised checks of the threshold algebra, reproducible from ``[run].seed``."""
    seed = ctx.config.run.seed
    with stage(ctx, "lemmas") as rec:
        errors = lemma_suite(seed)
        passed = all(errors[key] < LEMMA_TOLERANCES[key] for key in LEMMA_TOLERANCES)
        rec.summary = ", ".join(f"{key}={value:.2e}" for key, value in errors.items())
    if ctx.config.output.json:
        write_json(ctx.run_dir / "lemmas.json", {"seed": seed, "errors": errors, "tolerances": LEMMA_TOLERANCES})
    ctx.state.results.update(lemma_errors=errors, lemmas_passed=passed)
    return errors


def _zero_energy(ctx: RunContext) -> tuple[list[ThresholdClass], SpectralCount]:
    cfg = ctx.config
    l_max, tau = cfg.channels.l_max, cfg.tolerances.tau_res
    with stage(ctx, "zero_energy") as rec:
        sols = None if ctx.potential.is_free else zero_energy_solutions(ctx.potential, l_max, cfg.engine, tau)
        classes = classify_threshold(ctx.potential, l_max, cfg.engine, tau, sols)
        count = count_bound_states(
            ctx.potential,
            l_max,
            cfg.engine,
            tau,
            verify_oracle=cfg.run.verify_oracle,
            solutions=sols,
            classes=classes,
        )
        rec.summary = f"sigma_p={count.total}"
    ctx.recorder.trace(
        "threshold_classified",
        {"classes": [c.kind for c in classes], "per_channel": count.per_channel},
    )
    if count.oracle_total is not None:
        ctx.recorder.trace("oracle_checked", {"oracle_total": count.oracle_total, "total": count.total})
    return classes, count


def run_bound_states(ctx: RunContext) -> SpectralCount:
    _, count = _zero_energy(ctx)
    payload = {
        "per_channel": count.per_channel,
        "zero_energy": count.zero_energy,
        "total": count.total,
        "oracle_total": count.oracle_total,
    }
    if ctx.config.output.json:
        write_json(ctx.run_dir / "bound_states.json", payload)
    ctx.state.results.update(sigma_p=count.total, oracle_total=count.oracle_total)
    return count


def run_thresholds(ctx: RunContext) -> tuple[list[ThresholdClass], PPProjection]:
    classes, _ = _zero_energy(ctx)
    p_proj, source = resolve_p_projection(ctx.config.resonance, classes)
    if ctx.config.output.json:
        write_json(
            ctx.run_dir / "thresholds.json",
            {"channels": [asdict(c) for c in classes], "p_dim": p_proj.dim, "p_dim_source": source},
        )
    ctx.state.results.update(p_dim=p_proj.dim)
    return classes, p_proj


def run_levinson(ctx: RunContext, explore: bool = False) -> LevinsonReport:
    table = build_table(ctx)
    with stage(ctx, "identity") as rec:
        report = verify_identity(ctx.potential, ctx.config, explore=explore, table=table)
        rec.status = report.status
        rec.summary = f"residual={report.residual:.3e}"
    payload = report_to_json(report)
    if ctx.config.output.json:
        write_json(ctx.run_dir / "levinson.json", payload)
    if ctx.config.output.plotdata:
        curve = build_ssf(table, plane_moment(ctx.potential))
        rows = ([lam, xi] for lam, xi in zip(curve.lambdas, curve.xi))
        write_csv(ctx.run_dir / "ssf.csv", _meta(ctx, "levinson", branch=curve.branch), ["lambda", "xi"], rows)
    ctx.recorder.trace("identity_verified", {"status": report.status, "residual": report.residual})
    critical = any(c.kind != "regular" for c in report.thresholds)
    ctx.state.results.update(
        winding_term=report.winding_term,
        moment_term=report.moment_term,
        p_dim=report.p_dim,
        sigma_p=report.sigma_p,
        residual=report.residual,
        corollary_holds=bool(report.corollary.get("holds")),
        critical=critical,
    )
    return report


def run_hexagon(ctx: RunContext) -> tuple[HexagonTrace, SpectralCount]:
    table = build_table(ctx)
    classes, count = _zero_energy(ctx)
    p_proj, _ = resolve_p_projection(ctx.config.resonance, classes)
    regularizer = Regularizer(plane_moment(ctx.potential))
    with stage(ctx, "hexagon") as rec:
        trace = hexagon_winding(
            table,
            p_proj,
            regularizer,
            ctx.config.hexagon,
            workers=ctx.config.run.workers,
            unitarity_tol=ctx.config.tolerances.unitarity,
        )
        rec.summary = f"winding={trace.winding}"
    if ctx.config.output.csv:
        header = ["edge", "parameter", "re_det", "im_det", "unwrapped_arg"]
        write_csv(ctx.run_dir / "hexagon.csv", _meta(ctx, "hexagon", p_dim=p_proj.dim), header, trace_rows(trace))
    summary = {
        "winding": trace.winding,
        "accumulated": trace.accumulated,
        "residual": trace.residual,
        "max_step": trace.max_step,
        "edge_windings": trace.edge_windings,
        "det_agreement": trace.det_agreement,
        "unitarity_defect": trace.unitarity_defect,
        "vertex_gaps": trace.vertex_gaps,
        "orientation": trace.orientation,
        "p_dim": p_proj.dim,
        "sigma_p": count.total,
    }
    if ctx.config.output.json:
        write_json(ctx.run_dir / "hexagon.json", summary)
    ctx.state.results.update(
        hexagon_winding=trace.winding,
        sigma_p=count.total,
        p_dim=p_proj.dim,
        det_agreement=trace.det_agreement,
        vertex_gap=max(trace.vertex_gaps, default=0.0),
        unitarity_defect=trace.unitarity_defect,
    )
    return trace, count


def _channel_counts(pot: RadialPotential, cfg: RunConfig) -> list[int]:
    sols = zero_energy_solutions(pot, cfg.channels.l_max, cfg.engine, cfg.tolerances.tau_res)
    return [s.node_count for s in sols]


def locate_crossing(
    base: RadialPotential,
    lo: float,
    hi: float,
    counts_lo: list[int],
    cfg: RunConfig,
) -> tuple[float, int | None]:
    """Bisect the depth where the per-channel node counts leave ``counts_lo``; (depth, channel)."""
    counts_hi = _channel_counts(with_depth(base, hi), cfg)
    for _ in range(BISECTION_MAX_STEPS):
        if hi - lo <= BISECTION_RTOL * max(abs(hi), 1.0):
            break
        mid = 0.5 * (lo + hi)
        counts = _channel_counts(with_depth(base, mid), cfg)
        if counts == counts_lo:
            lo = mid
        else:
            hi, counts_hi = mid, counts
    changed = [ell for ell, (a, b) in enumerate(zip(counts_lo, counts_hi)) if a != b]
    return 0.5 * (lo + hi), (changed[0] if changed else None)


def _sweep_point(base: RadialPotential, depth: float, cfg: RunConfig, explore: bool) -> dict[str, Any]:
    pot = with_depth(base, depth)
    point: dict[str, Any] = {"depth": depth}
    try:
        sols = zero_energy_solutions(pot, cfg.channels.l_max, cfg.engine, cfg.tolerances.tau_res)
        classes = classify_threshold(pot, cfg.channels.l_max, cfg.engine, cfg.tolerances.tau_res, sols)
        count = count_bound_states(
            pot,
            cfg.channels.l_max,
            cfg.engine,
            cfg.tolerances.tau_res,
            verify_oracle=cfg.run.verify_oracle,
            solutions=sols,
            classes=classes,
        )
        point.update(
            per_channel=count.per_channel,
            sigma_p=count.total,
            thresholds=[c.kind for c in classes],
        )
        report = verify_identity(pot, cfg, explore=explore)
        point.update(status=report.status, residual=report.residual, report=report_to_json(report))
    except (LevlabError, ValueError) as exc:
        logger.warning("sweep point depth=%.6g failed: %s", depth, exc)
        point.update(status="error", error=str(exc))
    return point


def run_sweep(ctx: RunContext, explore: bool = False) -> dict[str, Any]:
    cfg = ctx.config
    if cfg.sweep.depth_min is None or cfg.sweep.depth_max is None:
        raise ValueError("[sweep].depth_min and [sweep].depth_max are required for sweep")
    if cfg.sweep.depth_max <= cfg.sweep.depth_min:
        raise ValueError("[sweep].depth_max must exceed [sweep].depth_min")
    depths = np.linspace(cfg.sweep.depth_min, cfg.sweep.depth_max, cfg.sweep.points).tolist()
    inner = replace(cfg, run=replace(cfg.run, workers=1))

    with stage(ctx, "sweep") as rec:
        points = ordered_map(lambda d: _sweep_point(ctx.potential, d, inner, explore), depths, cfg.run.workers)
        for point in points:
            ctx.recorder.trace("sweep_point", {k: point.get(k) for k in ("depth", "status", "sigma_p", "residual")})

        crossings: list[dict[str, Any]] = []
        counted = [p for p in points if "sigma_p" in p]
        for left, right in zip(counted[:-1], counted[1:]):
            if left["per_channel"] == right["per_channel"]:
                continue
            depth, ell = locate_crossing(ctx.potential, left["depth"], right["depth"], left["per_channel"], inner)
            crossings.append(
                {
                    "depth_low": left["depth"],
                    "depth_high": right["depth"],
                    "critical_depth": depth,
                    "sigma_jump": right["sigma_p"] - left["sigma_p"],
                    "channel": ell,
                    "type": threshold_kind(ell) if ell is not None else "unknown",
                    "p_dim_jump": 2 if ell == 1 else 0,
                }
            )
        sigmas = [p["sigma_p"] for p in counted]
        # near_threshold points sit inside the tau_res band and are not gated
        errors = sum(1 for p in points if p.get("status") == "error")
        failed = errors + sum(1 for p in points if p.get("status") == "fail")
        rec.summary = f"{len(points)} points, {len(crossings)} crossings, {failed} failed ({errors} errors)"

    payload = {
        "points": points,
        "crossings": crossings,
        "monotone": all(a <= b for a, b in zip(sigmas[:-1], sigmas[1:])),
        "failed": failed,
        "errors": errors,
    }
    write_json(ctx.run_dir / "sweep.json", payload)
    ctx.state.results.update(sweep_points=len(points), crossings=len(crossings), sweep_failed=failed)
    return payload
