"""Integer-order Bessel functions for free-solution matching.

J uses the ascending series for small arguments and a normalised Miller
backward recurrence otherwise. Y0/Y1 come from the Neumann expansions over the
same Miller sequence, higher Y orders from upward recurrence. K uses trapezoidal
quadrature of its cosh integral, which converges geometrically.
"""

from __future__ import annotations

import math

import numpy as np

from .models import BesselValue, SpecialFunctionDomainError

EULER_GAMMA = 0.5772156649015329
_RESCALE = 1e250


def _check_order(order: int) -> int:
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise SpecialFunctionDomainError(f"order must be a non-negative integer, got {order!r}")
    return int(order)


def _check_argument(x: float, *, strict: bool) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise SpecialFunctionDomainError(f"argument must be finite, got {x!r}")
    if x < 0 or (strict and x == 0):
        bound = "positive" if strict else "non-negative"
        raise SpecialFunctionDomainError(f"argument must be {bound}, got {x!r}")
    return x


def ascending_series_j(order: int, x: float, terms: int | None = None) -> float:
    """J_order(x) from the ascending power series; slow reference for small x."""
    order = _check_order(order)
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if terms is not None:
            if k >= terms:
                break
        elif abs(term) <= 1e-17 * max(abs(total), 1e-300) and k > 2:
            break
        if k > 500:
            break
    return total


def asymptotic_jy(order: int, x: float) -> tuple[float, float]:
    """(J, Y) from the Hankel asymptotic expansion; slow reference for x >> order."""
    order = _check_order(order)
    x = _check_argument(x, strict=True)
    mu = 4.0 * order * order
    p, q = 0.0, 0.0
    term = 1.0
    last = math.inf
    for k in range(60):
        # term is a_k(order) / x**k
        if abs(term) > last:
            break
        if k % 4 == 0:
            p += term
        elif k % 4 == 1:
            q += term
        elif k % 4 == 2:
            p -= term
        else:
            q -= term
        last = abs(term)
        if last < 1e-17:
            break
        term *= (mu - (2 * k + 1) ** 2) / ((k + 1) * 8.0 * x)
    chi = x - (0.5 * order + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    return amp * (p * math.cos(chi) - q * math.sin(chi)), amp * (p * math.sin(chi) + q * math.cos(chi))


def _miller_start(n_max: int, x_max: float) -> int:
    base = max(n_max, int(x_max))
    m = base + 20 + int(math.sqrt(40.0 * (base + 1)))
    return m + (m % 2)


def bessel_j_orders(n_max: int, x: np.ndarray | float, *, full: bool = True) -> np.ndarray:
    """J_0..J_m(x) for every x > 0 by Miller recurrence; shape (m + 1, len(x)).

    ``m`` is at least ``n_max`` and large enough for the Neumann sums used by Y.
    With ``full=False`` only rows 0..n_max are kept, which bounds memory for
    large batches of arguments.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0) or not np.all(np.isfinite(xs)):
        raise SpecialFunctionDomainError("Miller recurrence needs finite positive arguments")
    m = _miller_start(n_max, float(xs.max()))
    keep = m if full else n_max
    out = np.zeros((keep + 1, xs.size))
    nxt = np.zeros(xs.size)
    cur = np.full(xs.size, 1e-30)
    if m <= keep:
        out[m] = cur
    norm = np.zeros(xs.size)
    if m % 2 == 0:
        norm += 2.0 * cur
    for k in range(m, 0, -1):
        prev = (2.0 * k / xs) * cur - nxt
        nxt, cur = cur, prev
        if k - 1 <= keep:
            out[k - 1] = cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * cur
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            out[:, big] /= _RESCALE
            nxt[big] /= _RESCALE
            cur[big] /= _RESCALE
            norm[big] /= _RESCALE
    norm += out[0]
    return out / norm


def _y01(jseq: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = jseq.shape[0] - 1
    log_term = np.log(0.5 * xs) + EULER_GAMMA
    s0 = np.zeros(xs.size)
    s1 = np.zeros(xs.size)
    for k in range(1, m // 2 + 1):
        sign = -1.0 if k % 2 else 1.0
        s0 += sign * jseq[2 * k] / k
        upper = jseq[2 * k + 1] if 2 * k + 1 <= m else 0.0
        s1 += sign * (jseq[2 * k - 1] - upper) / k
    y0 = (2.0 / math.pi) * (log_term * jseq[0] - 2.0 * s0)
    y1 = (2.0 / math.pi) * (log_term * jseq[1] - jseq[0] / xs) + (2.0 / math.pi) * s1
    return y0, y1


def bessel_jy_orders(n_max: int, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """J_n and Y_n for n = 0..n_max at every x > 0; each of shape (n_max + 1, len(x))."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    jseq = bessel_j_orders(max(n_max, 1), xs)
    y = np.empty((max(n_max, 1) + 1, xs.size))
    y[0], y[1] = _y01(jseq, xs)
    for n in range(1, n_max):
        y[n + 1] = (2.0 * n / xs) * y[n] - y[n - 1]
    return jseq[: n_max + 1], y[: n_max + 1]


def _derivative(values: np.ndarray, order: int, xs: np.ndarray) -> np.ndarray:
    # values has rows 0..order (at least 0..1)
    if order == 0:
        return -values[1]
    return values[order - 1] - (order / xs) * values[order]


def bessel_j(order: int, x: float) -> float:
    order = _check_order(order)
    x = _check_argument(x, strict=False)
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x < order + 4:
        return ascending_series_j(order, x)
    return float(bessel_j_orders(order, x)[order, 0])


def bessel_j_deriv(order: int, x: float) -> float:
    order = _check_order(order)
    x = _check_argument(x, strict=False)
    if x == 0.0:
        return 0.5 if order == 1 else 0.0
    if order == 0:
        return -bessel_j(1, x)
    return bessel_j(order - 1, x) - (order / x) * bessel_j(order, x)


def bessel_y(order: int, x: float) -> float:
    order = _check_order(order)
    x = _check_argument(x, strict=True)
    _, y = bessel_jy_orders(max(order, 1), x)
    return float(y[order, 0])


def bessel_y_deriv(order: int, x: float) -> float:
    order = _check_order(order)
    x = _check_argument(x, strict=True)
    xs = np.array([x])
    _, y = bessel_jy_orders(max(order, 1), xs)
    return float(_derivative(y, order, xs)[0])


def bessel_jy(order: int, x: float) -> tuple[float, float, float, float]:
    """(J, J', Y, Y') of one order at x > 0, all from a single Miller pass."""
    order = _check_order(order)
    x = _check_argument(x, strict=True)
    xs = np.array([x])
    j, y = bessel_jy_orders(max(order, 1), xs)
    if x < order + 4:
        jv = ascending_series_j(order, x)
        jd = -ascending_series_j(1, x) if order == 0 else ascending_series_j(order - 1, x) - (order / x) * jv
    else:
        jv = float(j[order, 0])
        jd = float(_derivative(j, order, xs)[0])
    return jv, jd, float(y[order, 0]), float(_derivative(y, order, xs)[0])


def bessel_value(order: int, x: float) -> BesselValue:
    return BesselValue(order=order, argument=x, value=bessel_j(order, x), derivative=bessel_j_deriv(order, x))


def bessel_k(order: int, x: float) -> float:
    """K_order(x) = integral over t >= 0 of exp(-x cosh t) cosh(order t)."""
    order = _check_order(order)
    x = _check_argument(x, strict=True)
    h = min(0.05, 0.25 / math.sqrt(x))
    t1 = math.log(2.0 * 80.0 / x + 2.0)
    t_max = max(1.0, math.log(2.0 * (80.0 + order * t1) / x + 2.0) + 1.0)
    t = np.arange(0.0, t_max + h, h)
    # log of exp(-x cosh t) * cosh(order t), kept stable for large order * t
    expo = -x * np.cosh(t) + order * t + np.log1p(np.exp(-2.0 * order * t)) - math.log(2.0)
    peak = float(expo.max())
    weights = np.exp(expo - peak)
    weights[0] *= 0.5
    return float(h * weights.sum() * math.exp(peak))


def first_zero_j(order: int) -> float:
    """First positive zero of J_order, by bisection of the ascending series."""
    order = _check_order(order)
    lo = order + 0.5
    f_lo = ascending_series_j(order, lo)
    hi = lo
    while True:
        hi = lo + 0.1
        f_hi = ascending_series_j(order, hi)
        if f_lo * f_hi <= 0:
            break
        lo, f_lo = hi, f_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = ascending_series_j(order, mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo < 1e-15 * hi:
            break
    return 0.5 * (lo + hi)
