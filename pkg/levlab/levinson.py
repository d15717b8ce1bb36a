"""Spectral shift function, the arctan regulariser and the Levinson identity check.

The identity verified on every run is

    W + (1/4 pi) int V + dim P_p = -#sigma_p,

where W is the phase change of det S over (0, inf) divided by 2 pi. W is read
from the unwrapped phase of det(S beta). At high energy det(S beta) tends to 1
and the phase closes on a multiple of 2 pi; at threshold each channel phase is
extrapolated from its low-energy form, so the residual measures numerical error
rather than a rounding.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from .config import ResonanceConfig, RunConfig
from .models import (
    Channel,
    ExtrapolationError,
    GridSpec,
    LevinsonReport,
    NormalizationAmbiguityError,
    PhaseShiftTable,
    PPProjection,
    SSFCurve,
    ThresholdClass,
    ThresholdKind,
    ZeroLimit,
)
from .potentials import MOMENT_RTOL, RadialPotential, depth_scale, plane_moment
from .radial_engine import (
    NEAR_THRESHOLD_FACTOR,
    build_phase_table,
    classify_threshold,
    count_bound_states,
    near_threshold,
    p_dim_from_thresholds,
    wrap_branch,
    zero_energy_solutions,
)
from .threshold_algebra import QPair, build_p_projection, radial_qpair

logger = logging.getLogger(__name__)

NORMALIZATION_SLACK = 0.25
FLAT_VARIATION = 1e-12
ZERO_WINDOW_DECADE = 10.0
ZERO_WINDOW_MIN = 4
SLOPE_SIGNIFICANCE = 1e-3
SINE_FLOOR = 1e-14


@dataclass(frozen=True)
class Regularizer:
    """beta(lambda) = exp(i A(lambda)) with tr A(lambda) = (1/pi) arctan(lambda) int V."""

    moment: float

    def trace(self, lam: float | np.ndarray) -> float | np.ndarray:
        return regularizer_trace(self.moment, lam)

    def det(self, lam: float | np.ndarray) -> complex | np.ndarray:
        return np.exp(1j * np.asarray(self.trace(lam)))


def regularizer_trace(moment: float, lam: float | np.ndarray) -> float | np.ndarray:
    if np.any(np.asarray(lam) < 0):
        raise ValueError("regulariser trace needs lambda >= 0")
    out = np.arctan(lam) * moment / math.pi
    return float(out) if np.ndim(out) == 0 else out


def build_ssf(table: PhaseShiftTable, moment: float) -> SSFCurve:
    """xi = -(1/pi) * total phase + n, with the integer n fixed by xi(lambda_max) ~ moment / 4 pi."""
    theta = table.total_phase()
    target = moment / (4.0 * math.pi) + float(theta[-1]) / math.pi
    branch = int(round(target))
    if abs(target - branch) > NORMALIZATION_SLACK:
        raise NormalizationAmbiguityError(
            f"spectral shift constant {target:.4f} is not within {NORMALIZATION_SLACK} of an integer; "
            "raise lambda_max or l_max"
        )
    xi = -theta / math.pi + branch
    return SSFCurve(
        lambdas=table.lambdas.copy(),
        xi=xi,
        moment=moment,
        branch=branch,
        deltas=table.deltas.copy(),
        tail_low=float(table.tail[0]),
    )


def _arccot(x: np.ndarray | float) -> np.ndarray | float:
    """Branch of arccot with values in (0, pi)."""
    return 0.5 * math.pi - np.arctan(x)


def channel_threshold_limit(
    ell: int,
    lambdas: np.ndarray,
    delta: np.ndarray,
    kind: ThresholdKind | None = None,
) -> tuple[float, float]:
    """delta_l(0+) and its uncertainty from the low-energy form of cot delta_l.

    Channels 0 and 1 obey cot delta = b / lambda + ln(lambda) / pi + e + O(lambda ln lambda);
    b, e and a linear correction are fitted on the lowest decade of the grid. A regular s-wave
    or a p-resonant p-wave sends cot delta to -inf, so the phase reaches the next
    multiple of pi from below; otherwise the sign of b decides. An s-resonance
    without a resolved pole keeps the value at the lowest grid point. Higher channels
    vanish like lambda**l and keep the value at the lowest grid point.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    delta = np.asarray(delta, dtype=float)
    d0 = float(delta[0])
    nearest = math.pi * round(d0 / math.pi)
    if ell >= 2 or not np.any(delta):
        return d0, abs(d0 - nearest)
    window = max(ZERO_WINDOW_MIN, int(np.count_nonzero(lambdas <= ZERO_WINDOW_DECADE * lambdas[0])))
    lam, dw = lambdas[:window], delta[:window]
    sines = np.sin(dw)
    if np.any(np.abs(sines) < SINE_FLOOR):
        return d0, abs(d0 - nearest)
    u = np.log(lam)
    y = np.cos(dw) / sines - u / math.pi
    basis = np.column_stack([lam[0] / lam, np.ones(window), lam / lam[0]])
    (b, e, c), *_ = np.linalg.lstsq(basis, y, rcond=None)
    g = basis @ np.array([b, e, c]) + u / math.pi
    misfit = float(np.max(np.abs(wrap_branch(dw - _arccot(g)))))
    if misfit > 0.25 * math.pi:
        raise ExtrapolationError(
            f"zero-energy extrapolation diverges in channel l={ell}: low-energy form misses by {misfit:.3e} rad"
        )
    significant = abs(b) > SLOPE_SIGNIFICANCE * max(1.0, abs(u[0] / math.pi + e))
    if kind == "s_resonance" and not significant:
        # the constant term dominates: the phase already sits on its limit
        return d0, misfit + abs(d0 - nearest)
    if kind == "p_resonance" or (ell == 0 and kind in (None, "regular")):
        rising = True
    else:
        rising = bool(b < 0.0) if significant else True
    uncertainty = misfit
    if ell == 1 and kind != "p_resonance" and not significant:
        uncertainty += math.pi
    g0 = float(g[0])
    return d0 - float(_arccot(g0)) + math.pi * rising, uncertainty


def threshold_phase(
    lambdas: np.ndarray,
    deltas: np.ndarray,
    classes: Sequence[ThresholdClass] | None = None,
) -> tuple[float, float]:
    """Multiplicity-weighted sum of delta_l(0+) over the tabulated channels, with its uncertainty."""
    kinds = {c.ell: c.kind for c in classes or ()}
    theta = 0.0
    err = 0.0
    for ell, row in enumerate(np.atleast_2d(deltas)):
        limit, uncertainty = channel_threshold_limit(ell, lambdas, row, kinds.get(ell))
        mult = Channel(ell).multiplicity
        theta += mult * limit
        err += mult * uncertainty
    return theta, err


def _log_aitken(u: np.ndarray, g: np.ndarray) -> tuple[float, bool]:
    """Limit of xi = xi0 + c / (u - L) from three equally spaced points; (value, converged)."""
    d1, d2 = g[0] - g[1], g[1] - g[2]
    if abs(d1) + abs(d2) < FLAT_VARIATION:
        return float(g[0]), True
    if d2 == 0.0:
        raise ExtrapolationError("zero-energy extrapolation diverges: variation grows towards lambda -> 0")
    r = d1 / d2
    if r >= 1.0:
        raise ExtrapolationError(
            f"zero-energy extrapolation diverges: per-decade variation ratio {r:.3f} >= 1 towards lambda -> 0"
        )
    if r <= 0.0:
        return float(g[0]), False
    pole = (u[2] - r * u[0]) / (1.0 - r)
    c = d1 * (u[0] - pole) * (u[1] - pole) / (u[1] - u[0])
    return float(g[0] - c / (u[0] - pole)), True


def ssf_zero_limit(curve: SSFCurve, classes: Sequence[ThresholdClass] | None = None) -> ZeroLimit:
    """xi(0+) of a spectral shift curve.

    Curves built from a phase table are extrapolated channel by channel with
    ``channel_threshold_limit``. A bare curve falls back to log-scale Aitken
    extrapolation over its lowest three decades, with the shift of the estimate
    under a one-decade move as the uncertainty.
    """
    lams = curve.lambdas
    if not np.any(curve.xi):
        return ZeroLimit(value=0.0, uncertainty=0.0, nearest_integer=0)
    logs = np.log(lams)
    decade = math.log(10.0)
    if logs[-1] - logs[0] < 3.0 * decade:
        raise ExtrapolationError("zero-energy extrapolation needs at least three decades of grid")
    if curve.deltas is not None:
        theta0, err = threshold_phase(lams, curve.deltas, classes)
        value = curve.branch - (theta0 + curve.tail_low) / math.pi
        return ZeroLimit(value=value, uncertainty=err / math.pi, nearest_integer=int(round(value)))
    u = logs[0] + decade * np.arange(4)
    g = np.interp(u, logs, curve.xi)
    value, converged = _log_aitken(u[:3], g[:3])
    if not converged:
        uncertainty = abs(g[0] - g[1])
    else:
        try:
            shifted, ok = _log_aitken(u[1:], g[1:])
            uncertainty = abs(value - shifted) if ok else abs(g[0] - g[1])
        except ExtrapolationError:
            uncertainty = abs(g[0] - g[1])
    return ZeroLimit(value=value, uncertainty=uncertainty, nearest_integer=int(round(value)))


def resolve_p_projection(cfg: ResonanceConfig, classes: list[ThresholdClass]) -> tuple[PPProjection, str]:
    """P_p from synthetic Q vectors, an explicit p_dim, or the threshold classification (in that order)."""
    if cfg.q1 is not None and cfg.q2 is not None:
        return build_p_projection(QPair.from_vectors(np.array(cfg.q1), np.array(cfg.q2))), "q_vectors"
    if cfg.p_dim is not None:
        if cfg.p_dim == 1:
            return build_p_projection(QPair.from_vectors(np.array([1.0, 0.0]), np.zeros(2))), "override"
        return build_p_projection(radial_qpair(cfg.p_dim == 2)), "override"
    return build_p_projection(radial_qpair(p_dim_from_thresholds(classes) == 2)), "classification"


def scaled_grid(pot: RadialPotential, cfg: RunConfig) -> GridSpec:
    scale = depth_scale(pot) if cfg.grid.relative else 1.0
    return GridSpec(
        lambda_min=cfg.grid.lambda_min * scale,
        lambda_max=cfg.grid.lambda_max * scale,
        count=cfg.grid.count,
    )


def winding_term(
    table: PhaseShiftTable,
    moment: float,
    classes: Sequence[ThresholdClass] | None = None,
) -> tuple[float, dict[str, float], dict[str, float]]:
    """W from the unwrapped phase of det(S beta); returns (W, error budget, diagnostics).

    det(S beta) tends to 1 as lambda -> inf, so the high end closes by the wrapped
    gap to the nearest multiple of 2 pi. The low end is 2 theta(0+), extrapolated
    channel by channel, and is not rounded.
    """
    phase = 2.0 * table.total_phase() + regularizer_trace(moment, table.lambdas)
    gap_high = float(wrap_branch(phase[-1], 2.0 * math.pi))
    theta0, err = threshold_phase(table.lambdas, table.deltas, classes)
    theta0 += float(table.tail[0])
    w = (phase[-1] - gap_high - 2.0 * theta0 - 0.5 * moment) / (2.0 * math.pi)
    budget = {
        "det_sbeta_high": abs(complex(np.exp(1j * phase[-1])) - 1.0),
        "threshold_limit": err / math.pi,
    }
    diagnostics = {
        "closure_low": abs(float(phase[0]) - 2.0 * theta0),
        "closure_high": abs(gap_high),
        "tail_at_lambda_max": abs(float(table.tail[-1])),
    }
    return float(w), budget, diagnostics


def verify_identity(
    pot: RadialPotential,
    config: RunConfig,
    *,
    explore: bool = False,
    table: PhaseShiftTable | None = None,
) -> LevinsonReport:
    """Build every ingredient of the identity for one potential and assemble the report."""
    moment = plane_moment(pot)
    if moment == 0.0 and not pot.is_free and not explore:
        raise ValueError("potential has zero plane moment; the identity is only explored with --explore")

    tol = config.tolerances
    grid = scaled_grid(pot, config)
    if table is None:
        table = build_phase_table(
            pot,
            config.channels.l_max,
            grid,
            config.engine,
            max_points=config.grid.max_points,
            include_tail=config.channels.born_tail,
            workers=config.run.workers,
        )
    sols = [] if pot.is_free else zero_energy_solutions(pot, config.channels.l_max, config.engine, tol.tau_res)
    classes = classify_threshold(pot, config.channels.l_max, config.engine, tol.tau_res, sols)
    count = count_bound_states(
        pot,
        config.channels.l_max,
        config.engine,
        tol.tau_res,
        verify_oracle=config.run.verify_oracle,
        solutions=sols,
        classes=classes,
    )
    p_proj, p_source = resolve_p_projection(config.resonance, classes)

    w, budget, diagnostics = winding_term(table, moment, classes)
    moment_term = moment / (4.0 * math.pi)
    sigma_p = count.total
    residual = abs(w + moment_term + p_proj.dim + sigma_p)

    curve = build_ssf(table, moment)
    limit = ssf_zero_limit(curve, classes)
    xi_inf = float(curve.xi[-1])
    corollary_gap = abs(limit.value + sigma_p + p_proj.dim)
    budget.update(
        ssf_infinity=abs(xi_inf - moment_term),
        zero_limit=limit.uncertainty,
        step_change=max((s.relative_change for s in sols if math.isfinite(s.relative_change)), default=0.0),
        moment_term=MOMENT_RTOL * abs(moment_term) if pot.kind == "tabulated" else 0.0,
        p_dim=0.0,
        sigma_p=0.0,
    )
    budget["winding_term"] = budget["det_sbeta_high"] / (2.0 * math.pi) + budget["threshold_limit"]
    budget["residual"] = budget["winding_term"] + budget["moment_term"]

    notes = [f"p_dim from {p_source}"]
    critical = any(c.kind != "regular" for c in classes)
    limit_tol = tol.corollary if critical else tol.residual
    if critical:
        notes.append("threshold channel present: residual tolerance relaxed to the corollary tolerance")
    if count.oracle_total is not None:
        notes.append(f"dense oracle total {count.oracle_total}")

    corollary_holds = corollary_gap < tol.corollary and budget["ssf_infinity"] < tol.ssf_infinity
    if moment == 0.0 and not pot.is_free:
        status = "exploratory"
        notes.append("zero plane moment: identity not asserted")
    elif near_threshold(classes, NEAR_THRESHOLD_FACTOR * tol.tau_res):
        status = "near_threshold"
        notes.append("near threshold: identity not asserted")
    elif residual < limit_tol and corollary_holds:
        status = "pass"
    else:
        status = "fail"

    report = LevinsonReport(
        winding_term=w,
        moment_term=moment_term,
        p_dim=p_proj.dim,
        sigma_p=sigma_p,
        residual=residual,
        status=status,
        grid={
            "lambda_min": grid.lambda_min,
            "lambda_max": grid.lambda_max,
            "count": grid.count,
            "points": int(table.lambdas.size),
            "refined_points": table.refined_points,
            "l_max": table.l_max,
        },
        error_budget=budget,
        diagnostics=diagnostics,
        corollary={
            "xi_zero": limit.value,
            "xi_zero_uncertainty": limit.uncertainty,
            "xi_zero_expected": -(sigma_p + p_proj.dim),
            "xi_infinity": xi_inf,
            "xi_infinity_expected": moment_term,
            "deviation": corollary_gap,
            "holds": corollary_holds,
        },
        thresholds=classes,
        notes=notes,
    )
    logger.info(
        "identity: W=%.6f moment=%.6f p_dim=%d sigma_p=%d residual=%.3e status=%s",
        w,
        moment_term,
        p_proj.dim,
        sigma_p,
        residual,
        status,
    )
    return report


def report_to_json(report: LevinsonReport) -> dict[str, Any]:
    return {
        "winding_term": report.winding_term,
        "moment_term": report.moment_term,
        "p_dim": report.p_dim,
        "sigma_p": report.sigma_p,
        "residual": report.residual,
        "status": report.status,
        "grid": dict(report.grid),
        "error_budget": dict(report.error_budget),
        "diagnostics": dict(report.diagnostics),
        "corollary": dict(report.corollary),
        "thresholds": [asdict(c) for c in report.thresholds],
        "notes": list(report.notes),
    }
