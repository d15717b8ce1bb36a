from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .doctor import format_doctor_report, run_doctor
from .evidence import build_evidence_pack, read_state
from .models import InconclusiveWindingError, LevlabError
from .pipeline import (
    RunContext,
    finish_run,
    open_run,
    run_bound_states,
    run_hexagon,
    run_lemmas,
    run_levinson,
    run_phase_shifts,
    run_sweep,
    run_thresholds,
)

EXIT_OK = 0
EXIT_FAILURE = 2
EXIT_NEAR_THRESHOLD = 3

RUN_VERBS = ("phase-shifts", "bound-states", "thresholds", "levinson", "hexagon", "sweep", "lemmas")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="Path to levlab config (toml/json/yaml)")
    p.add_argument("--out", required=False, help="Output directory (overrides [output].directory)")
    p.add_argument("--workers", type=int, default=None, help="Worker threads (overrides [run].workers)")
    p.add_argument("--seed", type=int, default=None, help="Seed for randomised routines (overrides [run].seed)")
    p.add_argument("--verbose", action="store_true", help="Log progress to standard error")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="levlab", description="Two-dimensional scattering and Levinson's theorem lab")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_init = sub.add_parser("init", help="Create a starter levlab config")
    p_init.add_argument("path", nargs="?", default=".", help="Target directory")

    p_doctor = sub.add_parser("doctor", help="Validate config and preview the numerical budget")
    p_doctor.add_argument("--config", required=True, help="Path to levlab config (toml/json/yaml)")

    helps = {
        "phase-shifts": "Tabulate branch-continuous phase shifts as CSV",
        "bound-states": "Count bound states by node counting, cross-checked by a dense oracle",
        "thresholds": "Classify zero-energy behaviour of every channel",
        "levinson": "Verify the Levinson identity and its spectral-shift corollary",
        "hexagon": "Wind the regularised determinant of the six edge symbols",
        "sweep": "Sweep the potential depth and tabulate threshold crossings",
        "lemmas": "Check the threshold algebra on seeded random inputs",
    }
    for verb in RUN_VERBS:
        p = sub.add_parser(verb, help=helps[verb])
        _add_run_flags(p)
        if verb in ("levinson", "sweep"):
            p.add_argument("--explore", action="store_true", help="Allow zero plane moment; identity not asserted")

    p_ev = sub.add_parser("evidence", help="Build an evidence pack for an existing run directory")
    p_ev.add_argument("--run-dir", required=True, help="Run directory")
    p_ev.add_argument("--config", required=False, help="Config path used for the run")
    p_ev.add_argument("--out", required=False, help="Output tar.gz path")

    args = parser.parse_args(argv)

    if args.cmd == "init":
        _init_project(Path(args.path).resolve())
        return EXIT_OK

    if args.cmd == "evidence":
        run_dir = Path(args.run_dir).resolve()
        if args.config:
            config_path: Path | None = Path(args.config).resolve()
        else:
            state = read_state(run_dir)
            if not state:
                print("--config is required when state.json is not present", file=sys.stderr)
                return EXIT_FAILURE
            config_path = Path(state["config_path"]) if state.get("config_path") not in (None, "None") else None
        out = Path(args.out).resolve() if args.out else None
        print(build_evidence_pack(run_dir=run_dir, config_path=config_path, output_path=out))
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    if args.cmd == "doctor":
        report = run_doctor(cfg)
        print(format_doctor_report(report))
        return EXIT_OK if report.ok else EXIT_FAILURE

    _configure_logging(args.verbose)
    cfg = _apply_overrides(cfg, args)
    try:
        ctx = open_run(cfg, args.cmd, Path(args.out) if args.out else None)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    try:
        return _dispatch(ctx, args)
    except InconclusiveWindingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for key, value in exc.budget.items():
            print(f"  {key}={value:.6g}", file=sys.stderr)
        finish_run(ctx, "error")
        return EXIT_FAILURE
    except (LevlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        finish_run(ctx, "error")
        return EXIT_FAILURE


def _dispatch(ctx: RunContext, args: argparse.Namespace) -> int:
    if args.cmd == "phase-shifts":
        table, out = run_phase_shifts(ctx)
        gap = ctx.state.results.get("grid_convergence_gap")
        converged = gap is None or gap < ctx.config.tolerances.grid_convergence
        state = finish_run(ctx, "pass" if converged else "fail")
        print(f"run_id={state.run_id}")
        print(f"points={table.lambdas.size}")
        print(f"refined_points={table.refined_points}")
        if gap is not None:
            print(f"grid_convergence_gap={gap:.3e}")
        print(f"csv={out or ''}")
        return EXIT_OK if converged else EXIT_FAILURE

    if args.cmd == "lemmas":
        errors = run_lemmas(ctx)
        passed = bool(ctx.state.results["lemmas_passed"])
        state = finish_run(ctx, "pass" if passed else "fail")
        print(f"run_id={state.run_id}")
        print(f"seed={ctx.config.run.seed}")
        for key, value in errors.items():
            print(f"{key}_error={value:.3e}")
        return EXIT_OK if passed else EXIT_FAILURE

    if args.cmd == "bound-states":
        count = run_bound_states(ctx)
        state = finish_run(ctx, "pass")
        print(f"run_id={state.run_id}")
        for ell, n in enumerate(count.per_channel):
            zero = " zero_energy=1" if count.zero_energy[ell] else ""
            print(f"l={ell} bound_states={n}{zero}")
        print(f"total={count.total}")
        print(f"oracle_total={'' if count.oracle_total is None else count.oracle_total}")
        return EXIT_OK

    if args.cmd == "thresholds":
        classes, p_proj = run_thresholds(ctx)
        state = finish_run(ctx, "pass")
        print(f"run_id={state.run_id}")
        for c in classes:
            print(
                f"l={c.ell} class={c.kind} c_grow={c.c_grow:.6e} c_decay={c.c_decay:.6e} confidence={c.confidence:.3e}"
            )
        print(f"p_dim={p_proj.dim}")
        return EXIT_OK

    if args.cmd == "levinson":
        report = run_levinson(ctx, explore=args.explore)
        state = finish_run(ctx, report.status)
        print(f"run_id={state.run_id}")
        print(f"status={report.status}")
        print(f"winding_term={report.winding_term:.9f}")
        print(f"moment_term={report.moment_term:.9f}")
        print(f"p_dim={report.p_dim}")
        print(f"sigma_p={report.sigma_p}")
        print(f"residual={report.residual:.3e}")
        xi_zero = report.corollary.get("xi_zero")
        print(f"xi_zero={'' if xi_zero is None else format(xi_zero, '.6f')}")
        print(f"summary_json={state.reports.get('json', '')}")
        if report.status == "near_threshold":
            return EXIT_NEAR_THRESHOLD
        return EXIT_OK if report.status in ("pass", "exploratory") else EXIT_FAILURE

    if args.cmd == "hexagon":
        trace, count = run_hexagon(ctx)
        status = "pass" if trace.winding == count.total else "fail"
        state = finish_run(ctx, status)
        print(f"run_id={state.run_id}")
        print(f"winding={trace.winding}")
        print(f"sigma_p={count.total}")
        print(f"residual={trace.residual:.3e}")
        for edge, w in sorted(trace.edge_windings.items()):
            print(f"edge_{edge}_winding={w:.6f}")
        return EXIT_OK if status == "pass" else EXIT_FAILURE

    if args.cmd == "sweep":
        payload = run_sweep(ctx, explore=args.explore)
        ok = payload["failed"] == 0
        state = finish_run(ctx, "pass" if ok else "fail")
        print(f"run_id={state.run_id}")
        print(f"points={len(payload['points'])}")
        print(f"failed={payload['failed']}")
        print(f"errors={payload['errors']}")
        for item in payload["crossings"]:
            print(
                f"crossing depth={item['critical_depth']:.6f} type={item['type']} sigma_jump={item['sigma_jump']}"
            )
        print(f"sweep_json={ctx.run_dir / 'sweep.json'}")
        return EXIT_OK if ok else EXIT_FAILURE

    return EXIT_FAILURE


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    run = cfg.run
    if args.workers is not None:
        if args.workers < 1:
            raise SystemExit("--workers must be >= 1")
        run = replace(run, workers=args.workers)
    if args.seed is not None:
        run = replace(run, seed=args.seed)
    return replace(cfg, run=run)


def _init_project(target: Path) -> None:
    target.mkdir(parents=True, exist_ok=True)
    _write_if_missing(
        target / "levlab.toml",
        """[project]
name = "square-well"

[potential]
kind = "square_well"
# V(r) = -depth for r <= range
depth = 1.0
range = 1.0

[channels]
l_max = 12
born_tail = true

[grid]
# multiplied by the depth scale when relative = true
lambda_min = 1e-5
lambda_max = 1e4
count = 2048
relative = true
# rebuild at doubled density and gate on [tolerances].grid_convergence
check_convergence = false

[tolerances]
tau_res = 1e-6
residual = 0.02
corollary = 0.05

[sweep]
depth_min = 5.0
depth_max = 6.5
points = 16

[output]
directory = "levlab-out"

[run]
workers = 1
# seeds the randomised checks of the lemmas verb
seed = 0
verify_oracle = true
""",
    )
    print(f"Initialized levlab project at {target}")


def _write_if_missing(path: Path, content: str) -> None:
    if path.exists():
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
