from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import RunConfig
from .levinson import scaled_grid
from .oracle import square_well_critical_depths
from .potentials import RadialPotential, build_potential, depth_scale, plane_moment
from .radial_engine import step_budget

STEP_WARNING = 2_000_000
CRITICAL_PROXIMITY = 1e-3


@dataclass
class DoctorReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    infos: list[str] = field(default_factory=list)
    estimated_steps: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors


def _check_square_well(pot: RadialPotential, report: DoctorReport) -> None:
    for name, critical in square_well_critical_depths(pot.range).items():
        if abs(pot.depth - critical) <= CRITICAL_PROXIMITY * critical:
            report.warnings.append(
                f"depth {pot.depth} is within {CRITICAL_PROXIMITY:g} of the {name.replace('_', '-')} depth {critical:.9f}"
            )


def run_doctor(config: RunConfig) -> DoctorReport:
    report = DoctorReport()

    pcfg = config.potential
    if pcfg.kind == "tabulated" and (pcfg.table is None or not pcfg.table.exists()):
        report.errors.append(f"Missing potential table: {pcfg.table}")
        return report

    try:
        pot = build_potential(pcfg)
    except ValueError as exc:
        report.errors.append(f"Potential rejected: {exc}")
        return report

    grid = scaled_grid(pot, config)
    report.infos.append(f"potential={pot.kind}")
    report.infos.append(f"depth_scale={depth_scale(pot):g}")
    report.infos.append(f"cutoff_radius={pot.cutoff_radius:g}")
    report.infos.append(f"lambda_range=[{grid.lambda_min:.3e}, {grid.lambda_max:.3e}] count={grid.count}")

    try:
        moment = plane_moment(pot)
    except Exception as exc:
        report.errors.append(f"Plane moment failed: {exc}")
        return report
    report.infos.append(f"plane_moment={moment:.9g}")
    if moment == 0.0 and not pot.is_free:
        report.warnings.append("Plane moment is zero; levinson and sweep need --explore")

    decades = math.log10(grid.lambda_max / grid.lambda_min)
    if decades < 3.0:
        report.errors.append(f"Grid spans {decades:.2f} decades; the zero-energy extrapolation needs at least 3")
    if not grid.lambda_min <= 1.0 <= grid.lambda_max:
        report.warnings.append("lambda = 1 lies outside the grid; the hexagon verb cannot evaluate edge 1")

    l_max = config.channels.l_max
    kr = math.sqrt(grid.lambda_max) * pot.cutoff_radius
    report.infos.append(f"k_max*R_cut={kr:.3g} l_max={l_max}")
    if kr > l_max and not config.channels.born_tail:
        report.warnings.append(
            f"k_max*R_cut={kr:.3g} exceeds l_max={l_max} with the Born tail disabled; xi(lambda_max) will miss the moment limit"
        )

    steps = sum(step_budget(pot, ell, grid.lambda_max, config.engine) for ell in range(l_max + 1))
    report.estimated_steps = steps
    report.infos.append(f"numerov_steps_top_band={steps}")
    if steps > STEP_WARNING:
        report.warnings.append(
            f"Top energy band needs about {steps} Numerov steps; lower lambda_max or raise engine.phase_step"
        )

    if pot.kind == "square_well" and not pot.is_free:
        _check_square_well(pot, report)

    if config.run.workers > 1:
        report.infos.append(f"workers={config.run.workers}")

    return report


def format_doctor_report(report: DoctorReport) -> str:
    lines: list[str] = []
    lines.append("Doctor report")
    lines.append(f"ok={str(report.ok).lower()}")
    lines.append(f"errors={len(report.errors)} warnings={len(report.warnings)}")
    if report.estimated_steps:
        lines.append(f"estimated_steps={report.estimated_steps}")

    if report.infos:
        lines.append("[info]")
        lines.extend(f"- {msg}" for msg in report.infos)

    if report.warnings:
        lines.append("[warnings]")
        lines.extend(f"- {msg}" for msg in report.warnings)

    if report.errors:
        lines.append("[errors]")
        lines.extend(f"- {msg}" for msg in report.errors)

    return "\n".join(lines)
