"""Independent oracles: dense-matrix bound-state counts and closed-form square-well data.

Nothing here touches the Numerov engine, so these can cross-check it.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigvalsh_tridiagonal

from .models import Channel, QuadratureError
from .potentials import RadialPotential, evaluate
from .specfun import bessel_j, bessel_j_deriv, bessel_j_orders, bessel_jy, first_zero_j

logger = logging.getLogger(__name__)

DENSE_POINTS = 4096
DENSE_EXTENT = 4.0
DENSE_INNER = 1e-4
DENSE_PHASE_STEP = 0.05


def _dense_points(pot: RadialPotential, ell: int, points: int, span: float, x0: float) -> int:
    """Grid size that keeps h times the local wavenumber below DENSE_PHASE_STEP."""
    r = np.exp(x0 + span * np.linspace(0.0, 1.0, points))
    wave = float(np.max(r * np.sqrt(np.abs(np.asarray(evaluate(pot, r), dtype=float))))) + ell
    return max(points, math.ceil(span * wave / DENSE_PHASE_STEP) + 1)


def dense_hamiltonian(
    pot: RadialPotential,
    ell: int,
    points: int = DENSE_POINTS,
    extent: float = DENSE_EXTENT,
) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrised tridiagonal finite-difference operator of channel ``ell`` in x = ln r.

    With f = u / sqrt(r) the channel equation reads -f_xx + [l^2 + r^2 V] f = E r^2 f.
    The grid is uniform in x on [DENSE_INNER * R_cut, extent * R_cut]. Both ends
    carry the zero-energy free behaviour as Robin conditions: f_x = l f at the inner
    radius and f_x = -l f at the outer one (f_x = 0 for l = 0), so a zero-energy
    node beyond the outer radius still shows up as a negative eigenvalue. By
    Sylvester's law of inertia the negative eigenvalues of the unweighted operator
    are as many as the bound states of the weighted problem.
    """
    x0 = math.log(DENSE_INNER * pot.cutoff_radius)
    span = math.log(extent / DENSE_INNER)
    n = _dense_points(pot, ell, points, span, x0)
    h = span / (n - 1)
    r = np.exp(x0 + h * np.arange(n))
    q = ell * ell + r * r * np.asarray(evaluate(pot, r), dtype=float)
    diag = 2.0 / h**2 + q
    # ghost-point rows are (2 + 2hl, -2) at both ends
    diag[0] += 2.0 * ell / h
    diag[-1] += 2.0 * ell / h
    off = np.full(n - 1, -1.0 / h**2)
    # a diagonal similarity symmetrises the two boundary rows
    off[0] = off[-1] = -math.sqrt(2.0) / h**2
    return diag, off


def dense_bound_state_count(
    pot: RadialPotential,
    ell: int,
    points: int = DENSE_POINTS,
    extent: float = DENSE_EXTENT,
) -> int:
    if pot.is_free:
        return 0
    diag, off = dense_hamiltonian(pot, ell, points, extent)
    spread = float(np.max(np.abs(diag)) + 2.0 * np.max(np.abs(off)))
    lower = float(np.min(diag) - 2.0 * np.max(np.abs(off)) - 1.0)
    # the l = 0 free operator has an exact zero eigenvalue; keep rounding out of the count
    upper = -64.0 * np.finfo(float).eps * spread
    vals = eigvalsh_tridiagonal(diag, off, select="v", select_range=(lower, upper))
    return int(vals.size)


def dense_channel_counts(
    pot: RadialPotential,
    l_max: int,
    points: int = DENSE_POINTS,
    extent: float = DENSE_EXTENT,
) -> list[int]:
    return [dense_bound_state_count(pot, ell, points, extent) for ell in range(l_max + 1)]


def dense_total(
    pot: RadialPotential,
    l_max: int,
    points: int = DENSE_POINTS,
    extent: float = DENSE_EXTENT,
) -> int:
    counts = dense_channel_counts(pot, l_max, points, extent)
    total = sum(Channel(ell).multiplicity * n for ell, n in enumerate(counts))
    logger.info("dense oracle: per-channel=%s total=%d", counts, total)
    return total


def _count_zeros(order: int, upper: float) -> int:
    if upper <= 0:
        return 0
    x = np.linspace(upper * 1e-6, upper, max(2000, int(upper * 400)))
    values = bessel_j_orders(order, x, full=False)[order]
    return int(np.count_nonzero(values[:-1] * values[1:] < 0))


def square_well_channel_counts(depth: float, radius: float, l_max: int) -> list[int]:
    """Closed-form bound-state counts of an attractive square well, per channel.

    With K = sqrt(V0) a: N_0 = 1 + #{zeros of J_1 below K}, N_l = #{zeros of J_(l-1) below K}.
    """
    if depth <= 0:
        return [0] * (l_max + 1)
    big_k = math.sqrt(depth) * radius
    counts = [1 + _count_zeros(1, big_k)]
    counts.extend(_count_zeros(ell - 1, big_k) for ell in range(1, l_max + 1))
    return counts


def square_well_total(depth: float, radius: float, l_max: int) -> int:
    counts = square_well_channel_counts(depth, radius, l_max)
    return sum(Channel(ell).multiplicity * n for ell, n in enumerate(counts))


def square_well_critical_depths(radius: float = 1.0) -> dict[str, float]:
    """Depths V0 of the first p-resonance (J_0 zero) and s-resonance (J_1 zero)."""
    return {
        "p_resonance": (first_zero_j(0) / radius) ** 2,
        "s_resonance": (first_zero_j(1) / radius) ** 2,
    }


def square_well_phase_shift(depth: float, radius: float, ell: int, lam: float) -> float:
    """Principal-branch phase shift from two-Bessel matching, interior J_l(K r), K = sqrt(lam + V0)."""
    if lam <= 0:
        raise ValueError(f"energy must be positive, got {lam}")
    if lam + depth <= 0:
        raise ValueError("closed-form matching needs lam + V0 > 0")
    k = math.sqrt(lam)
    big_k = math.sqrt(lam + depth)
    f = bessel_j(ell, big_k * radius)
    fp = big_k * bessel_j_deriv(ell, big_k * radius)
    j, jp, y, yp = bessel_jy(ell, k * radius)
    num = fp * j - k * f * jp
    den = fp * y - k * f * yp
    if den == 0.0:
        return math.pi / 2
    return math.atan(num / den)


def born_phase_shift(pot: RadialPotential, ell: int, lam: float) -> float:
    """First Born phase shift -(pi/2) times the integral of V(r) J_l(kr)^2 r dr."""
    if pot.is_free:
        return 0.0
    k = math.sqrt(lam)

    def integrand(r: float) -> float:
        return float(evaluate(pot, r)) * bessel_j(ell, k * r) ** 2 * r

    breaks = [pot.range] if pot.kind == "square_well" and pot.range < pot.cutoff_radius else None
    value, abserr = quad(integrand, 0.0, pot.cutoff_radius, points=breaks, limit=400, epsrel=1e-10)
    if abserr > 1e-8 * max(abs(value), 1e-300) and abserr > 1e-14:
        raise QuadratureError("Born integral did not converge", abserr)
    return -0.5 * math.pi * value
