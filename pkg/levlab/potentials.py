"""Radial potential models with compact (or effectively compact) support."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .config import PotentialConfig
from .models import QuadratureError

logger = logging.getLogger(__name__)

GAUSSIAN_CUTOFF_WIDTHS = 8.0
MOMENT_RTOL = 1e-10


@dataclass(frozen=True)
class RadialPotential:
    """V(r) for a radial potential, treated as exactly 0 beyond ``cutoff_radius``.

    ``depth`` is V0 with the attractive sign convention V = -V0 inside the well;
    a negative depth is a barrier. For tabulated potentials ``depth`` holds
    max|V| and ``range`` the last sample radius.
    """

    kind: str
    depth: float
    range: float
    cutoff_radius: float
    table_r: tuple[float, ...] = ()
    table_v: tuple[float, ...] = ()
    units: str = "dimensionless"
    is_free: bool = False
    _interp: PchipInterpolator | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind == "tabulated" and self._interp is None:
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            object.__setattr__(self, "_interp", PchipInterpolator(r, v, extrapolate=False))


def square_well(depth: float, radius: float, cutoff: float | None = None) -> RadialPotential:
    if radius <= 0:
        raise ValueError(f"square well radius must be positive, got {radius}")
    r_cut = radius if cutoff is None else max(float(cutoff), radius)
    return RadialPotential(kind="square_well", depth=float(depth), range=float(radius), cutoff_radius=r_cut)


def gaussian(depth: float, sigma: float, cutoff: float | None = None) -> RadialPotential:
    if sigma <= 0:
        raise ValueError(f"gaussian width must be positive, got {sigma}")
    r_cut = GAUSSIAN_CUTOFF_WIDTHS * sigma if cutoff is None else float(cutoff)
    return RadialPotential(kind="gaussian", depth=float(depth), range=float(sigma), cutoff_radius=r_cut)


def zero() -> RadialPotential:
    """The free case V = 0; every downstream quantity short-circuits to exactly 0."""
    return RadialPotential(kind="square_well", depth=0.0, range=1.0, cutoff_radius=1.0, is_free=True)


def tabulated(
    r: np.ndarray,
    values: np.ndarray,
    tolerance: float = 1e-8,
    cutoff: float | None = None,
    units: str = "dimensionless",
) -> RadialPotential:
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.ndim != 1 or r.shape != v.shape or r.size < 4:
        raise ValueError("tabulated potential needs matching 1-D arrays with at least 4 samples")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
        raise ValueError("tabulated potential contains non-finite samples")
    if r[0] < 0:
        raise ValueError(f"tabulated radii must be non-negative, got r[0]={r[0]}")
    if np.any(np.diff(r) <= 0):
        raise ValueError("tabulated radii must be strictly increasing")
    scale = float(np.max(np.abs(v)))
    if abs(v[-1]) > tolerance * max(1.0, scale):
        raise ValueError(
            f"tabulated potential does not vanish at its last sample: V({r[-1]})={v[-1]} exceeds tolerance {tolerance}"
        )
    r_cut = float(r[-1]) if cutoff is None else min(float(cutoff), float(r[-1]))
    return RadialPotential(
        kind="tabulated",
        depth=scale,
        range=float(r[-1]),
        cutoff_radius=r_cut,
        table_r=tuple(r.tolist()),
        table_v=tuple(v.tolist()),
        units=units,
    )


def load_table(path: Path, tolerance: float = 1e-8, cutoff: float | None = None, units: str = "dimensionless") -> RadialPotential:
    """Read a two-column "r value" text file; '#' starts a comment."""
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as exc:
        raise ValueError(f"Cannot parse potential table {path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ValueError(f"Potential table {path} must have exactly two columns, got {data.shape[1]}")
    logger.info("loaded potential table %s (%d samples)", path, data.shape[0])
    return tabulated(data[:, 0], data[:, 1], tolerance=tolerance, cutoff=cutoff, units=units)


def build_potential(cfg: PotentialConfig) -> RadialPotential:
    kind = cfg.kind.lower().strip()
    if kind == "square_well":
        if cfg.depth == 0.0:
            return zero()
        return square_well(cfg.depth, cfg.range, cfg.cutoff_radius)
    if kind == "gaussian":
        if cfg.depth == 0.0:
            return zero()
        return gaussian(cfg.depth, cfg.range, cfg.cutoff_radius)
    if kind == "tabulated":
        if cfg.table is None:
            raise ValueError("[potential].table is required for kind=tabulated")
        return load_table(cfg.table, tolerance=cfg.table_tolerance, cutoff=cfg.cutoff_radius, units=cfg.units)
    raise ValueError(f"Unsupported potential kind: {cfg.kind}")


def evaluate(pot: RadialPotential, r: float | np.ndarray) -> float | np.ndarray:
    """V(r) for r >= 0; accepts a scalar or an array."""
    scalar = np.ndim(r) == 0
    rr = np.asarray(r, dtype=float)
    if pot.is_free or (pot.depth == 0.0 and pot.kind != "tabulated"):
        out = np.zeros_like(rr)
    elif pot.kind == "square_well":
        out = np.where(rr <= pot.range, -pot.depth, 0.0)
    elif pot.kind == "gaussian":
        out = np.where(rr <= pot.cutoff_radius, -pot.depth * np.exp(-((rr / pot.range) ** 2)), 0.0)
    else:
        r0 = pot.table_r[0]
        inside = pot._interp(np.clip(rr, r0, pot.cutoff_radius))
        out = np.where(rr < r0, pot.table_v[0], inside)
        out = np.where(rr > pot.cutoff_radius, 0.0, out)
    out = out + 0.0  # normalises -0.0
    return float(out) if scalar else out


def _tabulated_moment(pot: RadialPotential) -> float:
    r = np.asarray(pot.table_r)
    r = np.append(r[r < pot.cutoff_radius], pot.cutoff_radius)
    lo, hi = r[:-1], r[1:]
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)

    def panels(n: int) -> float:
        x, w = leggauss(n)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        vals = pot._interp(nodes) * nodes
        return float(np.sum(half * (vals @ w)))

    # the constant extension below the first sample
    head = pot.table_v[0] * r[0] ** 2 / 2.0
    coarse = panels(3) + head
    fine = panels(4) + head
    err = abs(fine - coarse)
    if err > MOMENT_RTOL * max(abs(fine), 1e-300):
        raise QuadratureError("plane moment of tabulated potential did not converge", err / max(abs(fine), 1e-300))
    return 2.0 * math.pi * fine


def plane_moment(pot: RadialPotential) -> float:
    """The integral of V over the plane, 2 pi times the integral of V(r) r dr."""
    if pot.is_free:
        return 0.0
    if pot.kind == "square_well":
        return -math.pi * pot.depth * pot.range**2
    if pot.kind == "gaussian":
        frac = -math.expm1(-((pot.cutoff_radius / pot.range) ** 2))
        return -math.pi * pot.depth * pot.range**2 * frac
    return _tabulated_moment(pot)


def max_abs_value(pot: RadialPotential) -> float:
    if pot.is_free:
        return 0.0
    if pot.kind == "tabulated":
        return float(np.max(np.abs(pot.table_v)))
    return abs(pot.depth)


def depth_scale(pot: RadialPotential) -> float:
    """Energy unit for relative grids: V0 (max|V| for tables), 1 for the free case."""
    scale = max_abs_value(pot)
    return scale if scale > 0 else 1.0


def with_depth(pot: RadialPotential, depth: float) -> RadialPotential:
    if pot.kind == "tabulated":
        if pot.depth == 0.0:
            raise ValueError("cannot rescale an identically zero table")
        factor = depth / pot.depth
        return tabulated(
            np.asarray(pot.table_r),
            np.asarray(pot.table_v) * factor,
            tolerance=1.0,
            cutoff=pot.cutoff_radius,
            units=pot.units,
        )
    if depth == 0.0:
        return zero()
    return replace(pot, depth=float(depth), is_free=False)


def describe(pot: RadialPotential) -> dict[str, object]:
    if pot.is_free:
        return {"kind": "free"}
    out: dict[str, object] = {
        "kind": pot.kind,
        "depth": pot.depth,
        "range": pot.range,
        "cutoff_radius": pot.cutoff_radius,
        "units": pot.units,
    }
    if pot.kind == "tabulated":
        out["samples"] = len(pot.table_r)
    return out
