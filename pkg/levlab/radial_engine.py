"""Per-channel radial solver: phase shifts, zero-energy data and bound-state counts.

The full radial function f = u / sqrt(r) is integrated in x = ln r, where it obeys

    f_xx = [l^2 + r^2 (V(r) - lambda)] f,

with no singular coefficient. Numerov marches from r0 = r0_fraction * R_cut to
R_cut on piecewise-uniform steps that double inward, so the step in x tracks
the local wavenumber r * sqrt(lambda + max|V|) + l + 1. Every energy of a decade
band is marched at once as one column of an array.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .config import EngineConfig
from .models import (
    Channel,
    ExteriorFitError,
    GridRefinementError,
    GridSpec,
    IntegrationError,
    MatchingDegeneracyError,
    OracleMismatchError,
    PhaseShiftTable,
    SpectralCount,
    ThresholdClass,
    ThresholdKind,
)
from .oracle import dense_channel_counts
from .potentials import RadialPotential, evaluate, max_abs_value
from .specfun import bessel_j_orders, bessel_jy_orders
from .util import ordered_map

logger = logging.getLogger(__name__)

H_MAX = 0.02
_BIG = 1e200
_TINY = 1e-300
DEGENERACY_FLOOR = 1e-14
REFINE_JUMP = math.pi / 4
EXTERIOR_CONDITION_LIMIT = 1e8
EXTERIOR_RATIO = 2.0
EXTERIOR_STEPS_PER_ORDER = 64
NEAR_THRESHOLD_FACTOR = 100.0
TAIL_MAX_NODES = 1200


@dataclass(frozen=True)
class ChannelSolution:
    """Regular solution of one channel at the matching radius.

    ``value`` is f(R) and ``slope`` is R f'(R), scaled to a unit vector.
    ``beta`` is the reduced log-derivative u'/u at R.
    """

    ell: int
    energy: float
    value: float
    slope: float
    beta: float
    interior_nodes: int
    exterior_node: bool
    relative_change: float

    @property
    def node_count(self) -> int:
        return self.interior_nodes + int(self.exterior_node)


def wrap_branch(values: np.ndarray | float, period: float = math.pi) -> np.ndarray | float:
    """Reduce to (-period/2, period/2]."""
    return values - period * np.ceil(np.asarray(values) / period - 0.5)


def _segments(
    pot: RadialPotential,
    ell: int,
    lam_top: float,
    engine: EngineConfig,
    scale: float = 1.0,
) -> list[tuple[float, float, int]]:
    """(x_start, h, n) pieces from ln r0 to ln R_cut, innermost first."""
    big_r = pot.cutoff_radius
    x0 = math.log(engine.r0_fraction * big_r)
    x_hi = math.log(big_r)
    c = engine.phase_step * scale
    h_max = H_MAX * scale
    s = math.sqrt(max(lam_top, 0.0) + max_abs_value(pot))
    h = min(h_max, c / (big_r * s + ell + 1))
    out: list[tuple[float, float, int]] = []
    while True:
        h_next = min(h_max, 2.0 * h)
        x_lo = -math.inf
        if h_next > h and s > 0:
            r_star = (c / h_next - ell - 1) / s
            if r_star > 0:
                x_lo = math.log(r_star)
        n = max(2, math.ceil((x_hi - x_lo) / h)) if math.isfinite(x_lo) else 0
        if not math.isfinite(x_lo) or x_hi - n * h - x0 < 2.0 * h_next:
            n = max(2, math.ceil((x_hi - x0) / h))
            out.append((x0, (x_hi - x0) / n, n))
            break
        out.append((x_hi - n * h, h, n))
        x_hi -= n * h
        h = h_next
    out.reverse()
    return out


def step_budget(pot: RadialPotential, ell: int, lam_top: float, engine: EngineConfig | None = None) -> int:
    """Numerov steps of one march at the coarsest level."""
    return sum(n for _, _, n in _segments(pot, ell, lam_top, engine or EngineConfig()))


def _q_column(pot: RadialPotential, ell2: np.ndarray, lam: np.ndarray, x: float) -> np.ndarray:
    r = math.exp(x)
    return ell2 + r * r * (float(evaluate(pot, r)) - lam)


def _taylor_start(
    pot: RadialPotential,
    ell2: np.ndarray,
    lam: np.ndarray,
    x: float,
    h: float,
    y: np.ndarray,
    dy: np.ndarray,
) -> np.ndarray:
    """y(x + h) from (y, y') by a fourth-order Taylor step of f_xx = Q f."""
    q_m = _q_column(pot, ell2, lam, x - h)
    q_0 = _q_column(pot, ell2, lam, x)
    q_p = _q_column(pot, ell2, lam, x + h)
    dq = (q_p - q_m) / (2.0 * h)
    d2q = (q_p - 2.0 * q_0 + q_m) / (h * h)
    y2 = q_0 * y
    y3 = dq * y + q_0 * dy
    y4 = d2q * y + 2.0 * dq * dy + q_0 * y2
    return y + h * dy + h * h / 2.0 * y2 + h**3 / 6.0 * y3 + h**4 / 24.0 * y4


def _march(
    pot: RadialPotential,
    ell2: np.ndarray,
    lam: np.ndarray,
    segments: Sequence[tuple[float, float, int]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Numerov over all columns; returns f(R), df/dx(R) and interior sign changes."""
    big_r = pot.cutoff_radius
    v_end = float(evaluate(pot, big_r))
    ell = np.sqrt(ell2)
    nodes = np.zeros(lam.shape, dtype=int)

    x_start, h, _ = segments[0]
    q = lam - float(evaluate(pot, 0.0))
    r_a, r_b = math.exp(x_start), math.exp(x_start + h)
    y0 = 1.0 - q * r_a * r_a / (4.0 * (ell + 1.0))
    y1 = np.exp(ell * h) * (1.0 - q * r_b * r_b / (4.0 * (ell + 1.0)))

    last = len(segments) - 1
    y_end = dy = y0
    for idx, (x_start, h, n) in enumerate(segments):
        r = np.exp(x_start + h * np.arange(n + 2))
        v = np.asarray(evaluate(pot, r), dtype=float)
        if idx == last:
            # end exactly on R_cut; the ghost node holds V(R_cut)
            r[n] = big_r
            r[n + 1] = big_r * math.exp(h)
            v[n] = v[n + 1] = v_end
        else:
            r[n + 1] = min(r[n + 1], big_r)
        h2 = h * h
        a = h2 * r * r * v
        b = h2 * r * r
        base = h2 * ell2

        t_prev = base + a[0] - b[0] * lam
        t_cur = base + a[1] - b[1] * lam
        w_prev = (1.0 - t_prev / 12.0) * y0
        w_cur = (1.0 - t_cur / 12.0) * y1
        y_prev, y_cur = y0, y1
        nodes += y0 * y1 < 0
        for i in range(1, n + 1):
            t_next = base + a[i + 1] - b[i + 1] * lam
            w_next = 2.0 * w_cur - w_prev + t_cur * y_cur
            y_next = w_next / (1.0 - t_next / 12.0)
            if i == n:
                break
            nodes += y_cur * y_next < 0
            w_prev, w_cur = w_cur, w_next
            y_prev, y_cur = y_cur, y_next
            t_prev, t_cur = t_cur, t_next
            if i % 16 == 0:
                mag = np.abs(y_cur)
                if mag.max() > _BIG:
                    f = np.where(mag > _BIG, 1.0 / _BIG, 1.0)
                    w_prev, w_cur, y_prev, y_cur = w_prev * f, w_cur * f, y_prev * f, y_cur * f

        # fourth-order Numerov derivative from the neighbours of node n
        dy = ((1.0 - t_next / 6.0) * y_next - (1.0 - t_prev / 6.0) * y_prev) / (2.0 * h)
        y_end = y_cur
        if idx < last:
            nx, nh, _ = segments[idx + 1]
            y0 = y_end
            y1 = _taylor_start(pot, ell2, lam, nx, nh, y_end, dy)

    bad = ~(np.isfinite(y_end) & np.isfinite(dy)) | ((np.abs(y_end) < _TINY) & (np.abs(dy) < _TINY))
    if np.any(bad):
        raise IntegrationError(
            f"radial solution lost at R_cut={big_r} for {int(bad.sum())} column(s); renormalisation failed"
        )
    return y_end, dy, nodes


def _normalise(value: np.ndarray, slope: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = np.hypot(value, slope)
    return value / norm, slope / norm


def exterior_coefficients(ell: int, value: float, slope: float) -> tuple[float, float]:
    """(c_grow, c_decay) of the zero-energy exterior solution through (f(R), R f'(R)).

    l = 0: f = c_decay + c_grow ln(r/R); l >= 1: f = c_grow (r/R)^l + c_decay (R/r)^l.
    """
    if ell == 0:
        return slope, value
    return 0.5 * (value + slope / ell), 0.5 * (value - slope / ell)


def _share(grow: float, decay: float) -> float:
    total = abs(grow) + abs(decay)
    return abs(grow) / total if total > 0 else 1.0


def _exterior_zero(ell: int, value: float, slope: float, tau_res: float) -> bool:
    grow, decay = exterior_coefficients(ell, value, slope)
    if _share(grow, decay) < tau_res:
        return False
    if ell == 0:
        return grow * decay < 0
    return grow * decay < 0 and abs(decay) > abs(grow)


def integrate_channels(
    pot: RadialPotential,
    ells: Iterable[int],
    lam: float,
    engine: EngineConfig | None = None,
    tau_res: float = 1e-6,
) -> list[ChannelSolution]:
    """Regular solutions of several channels at one energy, with step halving.

    The step is halved until the direction of (f, R f') at R_cut moves by less than
    ``step_tolerance``, at most ``max_halvings`` times. At lam = 0 the node count also
    includes the analytic zero of the exterior solution beyond R_cut.
    """
    engine = engine or EngineConfig()
    if lam < 0:
        raise ValueError(f"energy must be non-negative, got {lam}")
    ell_arr = np.asarray(list(ells), dtype=int)
    ell2 = ell_arr.astype(float) ** 2
    lam_col = np.full(ell_arr.shape, float(lam))
    big_r = pot.cutoff_radius

    prev: tuple[np.ndarray, np.ndarray] | None = None
    change = math.inf
    for level in range(engine.max_halvings + 1):
        segs = _segments(pot, int(ell_arr.max()), lam, engine, scale=0.5**level)
        y, dy, nodes = _march(pot, ell2, lam_col, segs)
        value, slope = _normalise(y, dy)
        if prev is not None:
            change = float(np.max(np.abs(prev[0] * slope - prev[1] * value)))
            if change < engine.step_tolerance:
                break
        prev = (value, slope)
    else:
        if engine.max_halvings > 0:
            logger.warning(
                "step halving stopped at %d levels with relative change %.3e > %.1e",
                engine.max_halvings,
                change,
                engine.step_tolerance,
            )

    out: list[ChannelSolution] = []
    for col, ell in enumerate(ell_arr.tolist()):
        v, s = float(value[col]), float(slope[col])
        beta = s / (big_r * v) + 0.5 / big_r if v != 0.0 else math.copysign(math.inf, s)
        exterior = lam == 0.0 and _exterior_zero(ell, v, s, tau_res)
        out.append(
            ChannelSolution(
                ell=ell,
                energy=float(lam),
                value=v,
                slope=s,
                beta=beta,
                interior_nodes=int(nodes[col]),
                exterior_node=exterior,
                relative_change=change,
            )
        )
    return out


def integrate_channel(
    pot: RadialPotential,
    ell: int,
    lam: float,
    engine: EngineConfig | None = None,
    tau_res: float = 1e-6,
) -> ChannelSolution:
    return integrate_channels(pot, [ell], lam, engine, tau_res)[0]


def _principal_phase(
    ell: int,
    k: np.ndarray,
    big_r: float,
    y: np.ndarray,
    dy: np.ndarray,
    lambdas: np.ndarray,
) -> np.ndarray:
    """tan delta = (f' J - k f J') / (f' Y - k f Y') at kR, on the principal branch."""
    j, yb = bessel_jy_orders(max(ell, 1), k * big_r)
    x = k * big_r
    if ell == 0:
        jp, yp = -j[1], -yb[1]
    else:
        jp = j[ell - 1] - (ell / x) * j[ell]
        yp = yb[ell - 1] - (ell / x) * yb[ell]
    f, fpk = _normalise(y, dy / (big_r * k))
    num = fpk * j[ell] - f * jp
    den = fpk * yb[ell] - f * yp
    degenerate = (np.abs(num) < DEGENERACY_FLOOR) & (np.abs(den) < DEGENERACY_FLOOR)
    if np.any(degenerate):
        lam = float(lambdas[np.flatnonzero(degenerate)[0]])
        raise MatchingDegeneracyError(f"matching is degenerate in channel l={ell} at lambda={lam:.6e}; refine lambda")
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(den == 0.0, 0.5 * math.pi, np.arctan(num / np.where(den == 0.0, 1.0, den)))
    return delta


def _band_tops(lambdas: np.ndarray, lam_max: float) -> np.ndarray:
    decade = np.floor(np.log10(lambdas))
    return np.minimum(10.0 ** (decade + 1.0), lam_max)


def _raw_phases(
    pot: RadialPotential,
    ell: int,
    lambdas: np.ndarray,
    lam_max: float,
    engine: EngineConfig,
) -> np.ndarray:
    """Principal-branch phases of one channel, one Numerov march per decade band."""
    out = np.empty(lambdas.shape)
    tops = _band_tops(lambdas, lam_max)
    for top in np.unique(tops):
        idx = np.flatnonzero(tops == top)
        lam = lambdas[idx]
        segs = _segments(pot, ell, float(top), engine)
        y, dy, _ = _march(pot, np.full(lam.shape, float(ell * ell)), lam, segs)
        out[idx] = _principal_phase(ell, np.sqrt(lam), pot.cutoff_radius, y, dy, lam)
        logger.debug("l=%d band lambda<=%.3e: %d points, %d segments", ell, top, lam.size, len(segs))
    return out


def phase_shift(pot: RadialPotential, ell: int, lam: float, engine: EngineConfig | None = None) -> float:
    """delta_l(lam) on the principal branch (-pi/2, pi/2]."""
    if lam <= 0:
        raise ValueError(f"phase shifts need lam > 0, got {lam}")
    if pot.is_free:
        return 0.0
    lambdas = np.array([float(lam)])
    return float(_raw_phases(pot, ell, lambdas, float(lam), engine or EngineConfig())[0])


def continue_branch(raw: np.ndarray) -> np.ndarray:
    """Continue principal phases mod pi, anchored at the last (highest-energy) point."""
    out = np.empty_like(raw)
    out[..., -1] = raw[..., -1]
    steps = wrap_branch(raw[..., :-1] - raw[..., 1:])
    out[..., :-1] = raw[..., -1:] + np.cumsum(steps[..., ::-1], axis=-1)[..., ::-1]
    return out


def born_tail(pot: RadialPotential, l_max: int, lambdas: np.ndarray) -> np.ndarray:
    """Born estimate of sum over l > l_max of m_l delta_l.

    It equals -(pi/2) times the integral of V(r) [1 - sum_{l<=l_max} m_l J_l(kr)^2] r dr,
    since J_0^2 + 2 sum J_l^2 = 1.
    """
    lam = np.asarray(lambdas, dtype=float)
    if pot.is_free:
        return np.zeros(lam.shape)
    k = np.sqrt(lam)
    mult = np.array([Channel(ell).multiplicity for ell in range(l_max + 1)], dtype=float)
    if pot.kind == "square_well":
        a = pot.range
        j = bessel_j_orders(l_max + 1, k * a, full=False)
        j_below = np.vstack([-j[1:2], j[:l_max]])
        # integral of J_l(kr)^2 r dr over [0, a] in closed form
        integral = 0.5 * a * a * (j[: l_max + 1] ** 2 - j_below * j[1 : l_max + 2])
        return 0.5 * math.pi * pot.depth * (0.5 * a * a - mult @ integral)

    big_r = pot.cutoff_radius
    out = np.empty(lam.shape)
    tops = _band_tops(lam, float(lam.max()))
    for top in np.unique(tops):
        idx = np.flatnonzero(tops == top)
        nodes = min(TAIL_MAX_NODES, 48 + 2 * math.ceil(math.sqrt(top) * big_r))
        t, w = leggauss(nodes)
        r = 0.5 * big_r * (t + 1.0)
        wr = 0.5 * big_r * w
        x = (k[idx, None] * r[None, :]).ravel()
        j = bessel_j_orders(l_max, x, full=False)
        partial = (mult @ j**2).reshape(idx.size, nodes)
        integrand = np.asarray(evaluate(pot, r)) * r * (1.0 - partial)
        out[idx] = -0.5 * math.pi * (integrand @ wr)
    return out


def build_phase_table(
    pot: RadialPotential,
    l_max: int,
    grid: GridSpec,
    engine: EngineConfig | None = None,
    *,
    max_points: int = 16384,
    include_tail: bool = True,
    workers: int = 1,
) -> PhaseShiftTable:
    """Branch-continuous delta_l(lambda) for l = 0..l_max, refined where phases move fast."""
    engine = engine or EngineConfig()
    lambdas = grid.points()
    if pot.is_free:
        zeros = np.zeros((l_max + 1, lambdas.size))
        return PhaseShiftTable(lambdas=lambdas, deltas=zeros, l_max=l_max, grid=grid, tail=np.zeros(lambdas.size))

    lam_max = float(lambdas[-1])

    def raw_all(points: np.ndarray) -> np.ndarray:
        rows = ordered_map(lambda ell: _raw_phases(pot, ell, points, lam_max, engine), range(l_max + 1), workers)
        return np.vstack(rows)

    raw = raw_all(lambdas)
    refined = 0
    while True:
        jumps = np.abs(wrap_branch(raw[:, :-1] - raw[:, 1:]))
        bad = np.flatnonzero((jumps > REFINE_JUMP).any(axis=0))
        if bad.size == 0:
            break
        if lambdas.size + bad.size > max_points:
            first = int(bad[0])
            raise GridRefinementError(
                f"refinement budget of {max_points} points exhausted",
                (float(lambdas[first]), float(lambdas[first + 1])),
            )
        mids = np.sqrt(lambdas[bad] * lambdas[bad + 1])
        lambdas = np.concatenate([lambdas, mids])
        raw = np.hstack([raw, raw_all(mids)])
        order = np.argsort(lambdas, kind="stable")
        lambdas, raw = lambdas[order], raw[:, order]
        refined += mids.size
        logger.info("refined phase grid: +%d points (total %d)", mids.size, lambdas.size)

    deltas = continue_branch(raw)
    tail = born_tail(pot, l_max, lambdas) if include_tail else np.zeros(lambdas.size)
    return PhaseShiftTable(
        lambdas=lambdas,
        deltas=deltas,
        l_max=l_max,
        grid=grid,
        tail=tail,
        refined_points=refined,
    )


def grid_convergence_gap(
    pot: RadialPotential,
    l_max: int,
    grid: GridSpec,
    engine: EngineConfig | None = None,
    *,
    max_points: int = 16384,
    workers: int = 1,
) -> float:
    """Largest change of any delta_l at the shared nodes when the grid density doubles."""
    coarse = build_phase_table(pot, l_max, grid, engine, max_points=max_points, include_tail=False, workers=workers)
    fine_grid = GridSpec(grid.lambda_min, grid.lambda_max, 2 * grid.count - 1, grid.spacing)
    fine = build_phase_table(
        pot, l_max, fine_grid, engine, max_points=2 * max_points, include_tail=False, workers=workers
    )
    pos = np.clip(np.searchsorted(fine.lambdas, coarse.lambdas), 1, fine.lambdas.size - 1)
    nearer = np.where(
        np.abs(fine.lambdas[pos - 1] - coarse.lambdas) < np.abs(fine.lambdas[pos] - coarse.lambdas), pos - 1, pos
    )
    shared = np.abs(fine.lambdas[nearer] - coarse.lambdas) <= 1e-12 * coarse.lambdas
    gap = float(np.max(np.abs(coarse.deltas[:, shared] - fine.deltas[:, nearer[shared]]), initial=0.0))
    logger.info("grid convergence: %d shared nodes, max phase change %.3e", int(shared.sum()), gap)
    return gap


def zero_energy_solutions(
    pot: RadialPotential,
    l_max: int,
    engine: EngineConfig | None = None,
    tau_res: float = 1e-6,
) -> list[ChannelSolution]:
    return integrate_channels(pot, range(l_max + 1), 0.0, engine, tau_res)


def threshold_kind(ell: int) -> ThresholdKind:
    if ell == 0:
        return "s_resonance"
    if ell == 1:
        return "p_resonance"
    return "zero_eigenvalue"


def _exterior_march(ell: int, value: float, slope: float, ratio: float) -> float:
    """f(ratio * R) from (f(R), R f'(R)) by Numerov on f_xx = l^2 f, x = ln(r / R)."""
    n = EXTERIOR_STEPS_PER_ORDER * (ell + 1)
    h = math.log(ratio) / n
    t = h * h * ell * ell
    y_prev = value
    y_cur = value + h * slope + 0.5 * t * value + t * h * slope / 6.0 + t * t * value / 24.0
    for _ in range(n - 1):
        y_prev, y_cur = y_cur, (2.0 + 10.0 * t / 12.0) * y_cur / (1.0 - t / 12.0) - y_prev
    return y_cur


def fit_exterior(
    ell: int,
    value: float,
    slope: float,
    ratio: float = EXTERIOR_RATIO,
) -> tuple[float, float, float]:
    """(c_grow, c_decay, cond) of the exterior solution sampled at R_cut and ratio * R_cut.

    The second sample continues the zero-energy solution through the potential-free
    exterior. Rows are scaled to unit size, so the condition number measures how
    well the two radii separate the growing and decaying branches.
    """
    if ratio <= 1.0:
        raise ValueError(f"exterior radius ratio must exceed 1, got {ratio}")
    outer = _exterior_march(ell, value, slope, ratio)
    if ell == 0:
        basis = np.array([[0.0, 1.0], [math.log(ratio), 1.0]])
        rhs = np.array([value, outer])
    else:
        grow, decay = ratio**ell, ratio**-ell
        basis = np.array([[1.0, 1.0], [1.0, decay / grow]])
        rhs = np.array([value, outer / grow])
    coef, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    cond = float(np.linalg.cond(basis))
    if not np.all(np.isfinite(coef)) or not np.any(coef) or cond > EXTERIOR_CONDITION_LIMIT:
        raise ExteriorFitError(f"exterior fit failed in channel l={ell}; enlarge R_cut", cond)
    return float(coef[0]), float(coef[1]), cond


def classify_threshold(
    pot: RadialPotential,
    l_max: int,
    engine: EngineConfig | None = None,
    tau_res: float = 1e-6,
    solutions: list[ChannelSolution] | None = None,
) -> list[ThresholdClass]:
    """Zero-energy classification of every channel by its growing-branch share."""
    if pot.is_free:
        return [ThresholdClass(ell=ell, kind="regular", c_grow=0.0, c_decay=0.0, confidence=1.0) for ell in range(l_max + 1)]
    sols = solutions or zero_energy_solutions(pot, l_max, engine, tau_res)
    out: list[ThresholdClass] = []
    for sol in sols:
        grow, decay, cond = fit_exterior(sol.ell, sol.value, sol.slope)
        share = _share(grow, decay)
        kind: ThresholdKind = threshold_kind(sol.ell) if share < tau_res else "regular"
        out.append(
            ThresholdClass(
                ell=sol.ell,
                kind=kind,
                c_grow=grow,
                c_decay=decay,
                confidence=share,
                condition_number=cond,
            )
        )
        if kind != "regular":
            logger.info("channel l=%d classified %s (share %.3e)", sol.ell, kind, share)
    return out


def p_dim_from_thresholds(classes: Sequence[ThresholdClass]) -> int:
    """dim P_p from the radial engine: the l = +1 and -1 waves resonate together."""
    return 2 if any(c.ell == 1 and c.kind == "p_resonance" for c in classes) else 0


def near_threshold(classes: Sequence[ThresholdClass], band: float) -> bool:
    """True when a channel sits inside the band around criticality but off its center."""
    return any(c.kind == "regular" and c.confidence < band for c in classes)


def count_bound_states(
    pot: RadialPotential,
    l_max: int,
    engine: EngineConfig | None = None,
    tau_res: float = 1e-6,
    *,
    verify_oracle: bool = True,
    solutions: list[ChannelSolution] | None = None,
    classes: list[ThresholdClass] | None = None,
) -> SpectralCount:
    """Negative eigenvalues per channel by Sturm node counting, plus zero-energy eigenvalues."""
    if pot.is_free:
        zeros = [0] * (l_max + 1)
        return SpectralCount(per_channel=zeros, zero_energy=[False] * (l_max + 1), oracle_total=0)
    sols = solutions or zero_energy_solutions(pot, l_max, engine, tau_res)
    classes = classes or classify_threshold(pot, l_max, engine, tau_res, sols)
    per_channel = [s.node_count for s in sols]
    zero_flags = [c.kind == "zero_eigenvalue" for c in classes]
    count = SpectralCount(per_channel=per_channel, zero_energy=zero_flags)

    critical = any(c.kind != "regular" for c in classes) or near_threshold(classes, NEAR_THRESHOLD_FACTOR * tau_res)
    if verify_oracle and not critical:
        dense = dense_channel_counts(pot, l_max)
        count.oracle_total = sum(Channel(ell).multiplicity * n for ell, n in enumerate(dense))
        if dense != per_channel:
            raise OracleMismatchError(f"node counts {per_channel} disagree with dense-matrix counts {dense}")
    elif verify_oracle:
        logger.info("dense oracle skipped: a channel is at or near threshold")
    return count
