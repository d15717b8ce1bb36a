"""Finite-dimensional algebra of the p-resonance projection and the edge determinants.

Vectors use the physics inner product <a, b> = sum(conj(a) * b); the 2x2 P_p
matrices are written in the ordered basis {xi_-1, xi_+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import PPProjection, PseudoInverseDegeneracyError

DEPENDENCE_TOL = 1e-8
INDEPENDENCE_FLOOR = 1e-12
NEAR_DEPENDENCE = (1e-2, 1e-4, 1e-6)
LEMMA_TOLERANCES = {"pseudo_inverse": 1e-12, "determinant": 1e-8, "projection": 1e-8}


def _inner(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def _ket_bra(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.outer(a, np.conj(b))


@dataclass(frozen=True)
class QPair:
    q1: np.ndarray
    q2: np.ndarray
    q1_zero: bool
    q2_zero: bool
    dependent: bool
    alpha: complex | None = None

    @property
    def n(self) -> int:
        return int(self.q1.size)

    @classmethod
    def from_vectors(cls, q1: np.ndarray, q2: np.ndarray, tol: float = DEPENDENCE_TOL) -> QPair:
        """Flag the degeneracies Q1 = 0, Q2 = 0 and Q2 = alpha Q1."""
        a = np.asarray(q1, dtype=complex).ravel()
        b = np.asarray(q2, dtype=complex).ravel()
        if a.size == 0 or a.shape != b.shape:
            raise ValueError(f"Q vectors need a common non-zero dimension, got {a.size} and {b.size}")
        na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        scale = max(na, nb)
        a_zero = na <= INDEPENDENCE_FLOOR * scale or scale == 0.0
        b_zero = nb <= INDEPENDENCE_FLOOR * scale or scale == 0.0
        dependent = False
        alpha: complex | None = None
        if not a_zero and not b_zero:
            alpha = _inner(a, b) / na**2
            dependent = float(np.linalg.norm(b - alpha * a)) / nb < tol
            if not dependent:
                alpha = None
        return cls(q1=a, q2=b, q1_zero=a_zero, q2_zero=b_zero, dependent=dependent, alpha=alpha)


def rank2_pseudo_inverse(phi: np.ndarray, psi: np.ndarray, c: complex) -> np.ndarray:
    """Closed-form T^dagger of T = |phi><phi| + c |psi><psi|; T T^dagger projects onto span{phi, psi}."""
    phi = np.asarray(phi, dtype=complex).ravel()
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(abs(c) - 1.0) > 1e-12:
        raise ValueError(f"c must be unimodular, got |c|={abs(c)}")
    pp = _inner(phi, phi).real
    ss = _inner(psi, psi).real
    ps = _inner(phi, psi)
    sp = ps.conjugate()
    k = pp * ss - abs(ps) ** 2
    if k <= INDEPENDENCE_FLOOR * pp * ss:
        raise PseudoInverseDegeneracyError(f"phi and psi are numerically dependent (k={k:.3e})")
    mixed = c * ss + pp
    out = (
        (c * ss**2 + abs(ps) ** 2) * _ket_bra(phi, phi)
        - mixed * ps * _ket_bra(phi, psi)
        - mixed * sp * _ket_bra(psi, phi)
        + (pp**2 + c * abs(ps) ** 2) * _ket_bra(psi, psi)
    )
    return out / (c * k * k)


def rank1_pseudo_inverse(phi: np.ndarray) -> np.ndarray:
    """T^dagger = |phi><phi| / ||phi||^4 of T = |phi><phi|."""
    phi = np.asarray(phi, dtype=complex).ravel()
    norm2 = _inner(phi, phi).real
    if norm2 == 0.0:
        raise PseudoInverseDegeneracyError("rank-1 inverse of the zero vector")
    return _ket_bra(phi, phi) / norm2**2


def _rank1_projector(alpha: complex) -> np.ndarray:
    v = np.array([1 + 1j * alpha.conjugate(), 1 - 1j * alpha.conjugate()]) / math.sqrt(2.0 * (1.0 + abs(alpha) ** 2))
    return np.outer(v, v.conj())


def build_p_projection(q: QPair) -> PPProjection:
    if q.q1_zero and q.q2_zero:
        return PPProjection(matrix=np.zeros((2, 2), dtype=complex), dim=0)
    if q.q1_zero:
        return PPProjection(matrix=0.5 * np.array([[1, -1], [-1, 1]], dtype=complex), dim=1)
    if q.q2_zero:
        return PPProjection(matrix=0.5 * np.array([[1, 1], [1, 1]], dtype=complex), dim=1)
    if q.dependent and q.alpha is not None:
        return PPProjection(matrix=_rank1_projector(q.alpha), dim=1)
    return PPProjection(matrix=np.eye(2, dtype=complex), dim=2)


def _row_space(q: QPair) -> np.ndarray:
    """Orthonormal basis V_r of the row space of Q = [Q1 Q2], rank taken from the QPair flags."""
    rank = 1 if (q.q1_zero or q.q2_zero or q.dependent) else 2
    _, _, vh = np.linalg.svd(np.column_stack([q.q1, q.q2]), full_matrices=False)
    return vh[:rank].conj().T


def resonance_projection_bruteforce(q: QPair) -> np.ndarray:
    """-1/2 G* T^dagger G with G = |Q1 - iQ2><xi_-1| + |Q1 + iQ2><xi_+1|; equals -P_p.

    With Q = [Q1 Q2] = U S V*, T = Q Q* and G = Q M, so G* T^dagger G = M* V_r V_r* M.
    Evaluating it in that form never divides by a small singular value.
    """
    if q.q1_zero and q.q2_zero:
        raise ValueError("Q1 and Q2 must not both vanish")
    m = np.array([[1.0, 1.0], [-1j, 1j]])
    v = _row_space(q)
    mv = m.conj().T @ v
    return -0.5 * mv @ mv.conj().T


def block_unitary_embed_det(u: np.ndarray, c: complex) -> tuple[np.ndarray, complex]:
    """B = I + 1/2 [[1, c], [conj(c), 1]] (x) (U - I) and det(B), which equals det(U)."""
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    n = u.shape[0]
    if u.shape != (n, n):
        raise ValueError(f"U must be square, got shape {u.shape}")
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(n))))
    if defect > 1e-12 * max(n, 1):
        raise ValueError(f"U is not unitary (max defect {defect:.3e})")
    coupling = np.array([[1.0, c], [np.conj(c), 1.0]], dtype=complex)
    b = np.eye(2 * n, dtype=complex) + 0.5 * np.kron(coupling, u - np.eye(n))
    return b, complex(np.linalg.det(b))


def gamma4_det(s: float, p_dim: int) -> complex:
    """((2is - 1) / (2is + 1)) ** p_dim; 1 in the limits s -> +-inf."""
    if p_dim not in (0, 1, 2):
        raise ValueError(f"p_dim must be 0, 1 or 2, got {p_dim}")
    if p_dim == 0 or math.isinf(s):
        return 1.0 + 0.0j
    z = complex(-1.0, 2.0 * s) / complex(1.0, 2.0 * s)
    return z**p_dim


def radial_qpair(p_resonant: bool, n: int = 2) -> QPair:
    """Q vectors of a radial potential: independent at a p-resonance, absent otherwise."""
    if p_resonant:
        return QPair.from_vectors(np.eye(n)[0], np.eye(n)[1])
    return QPair.from_vectors(np.zeros(n), np.zeros(n))


def embed_p_projection(p: PPProjection, l_max: int) -> np.ndarray:
    """P_p on the partial-wave space ordered m = -l_max..l_max (block at m = -1, +1)."""
    size = 2 * l_max + 1
    out = np.zeros((size, size), dtype=complex)
    idx = [l_max - 1, l_max + 1]
    out[np.ix_(idx, idx)] = p.matrix
    return out


def unwrapped_argument(values: np.ndarray) -> np.ndarray:
    return np.unwrap(np.angle(np.asarray(values, dtype=complex)))


def winding_number(values: np.ndarray) -> float:
    """Anticlockwise turns of a sampled unimodular path, from its unwrapped argument."""
    arg = unwrapped_argument(values)
    return float((arg[-1] - arg[0]) / (2.0 * math.pi))


def _unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_qpair(rng: np.random.Generator, trial: int) -> QPair:
    """Cycles through independent, near-dependent, dependent, Q1 = 0 and Q2 = 0 pairs."""
    n = int(rng.integers(2, 7))
    q1 = _unit_vector(rng, n)
    alpha = complex(rng.normal(), rng.normal())
    kind = trial % 5
    if kind == 0:
        q2 = _unit_vector(rng, n)
    elif kind == 1:
        q2 = alpha * q1 + NEAR_DEPENDENCE[trial % len(NEAR_DEPENDENCE)] * _unit_vector(rng, n)
    elif kind == 2:
        q2 = alpha * q1
    elif kind == 3:
        q1, q2 = np.zeros(n), _unit_vector(rng, n)
    else:
        q2 = np.zeros(n)
    return QPair.from_vectors(q1, q2)


def lemma_suite(seed: int, trials: int = 1000, unitaries: int = 200, pairs: int = 200) -> dict[str, float]:
    """Largest violation of each finite-dimensional identity over seeded random inputs.

    - pseudo_inverse: <phi, T+ phi> = 1, <psi, T+ psi> = conj(c), vanishing cross
      terms, and T T+ = T+ T = projection onto span{phi, psi}
    - determinant: det B = det U and det(B - z) = (1 - z)^n det(U - z)
    - projection: the brute-force form equals -P_p, and P_p is an orthogonal projection
    """
    rng = np.random.default_rng(seed)
    pinv_err = 0.0
    for _ in range(trials):
        n = int(rng.integers(4, 9))
        phi, psi = _unit_vector(rng, n), _unit_vector(rng, n)
        c = complex(np.exp(1j * rng.uniform(-math.pi, math.pi)))
        t = _ket_bra(phi, phi) + c * _ket_bra(psi, psi)
        td = rank2_pseudo_inverse(phi, psi, c)
        q, _ = np.linalg.qr(np.column_stack([phi, psi]))
        span = q @ q.conj().T
        # T+ grows like 1/k as phi and psi align; gaps are taken relative to that size
        k = 1.0 - abs(_inner(phi, psi)) ** 2
        gaps = [
            abs(_inner(phi, td @ phi) - 1.0),
            abs(_inner(psi, td @ psi) - c.conjugate()),
            abs(_inner(phi, td @ psi)),
            abs(_inner(psi, td @ phi)),
            float(np.max(np.abs(t @ td - span))),
            float(np.max(np.abs(td @ t - span))),
        ]
        pinv_err = max(pinv_err, k * max(gaps))

    det_err = 0.0
    for _ in range(unitaries):
        n = int(rng.integers(1, 9))
        u = _random_unitary(rng, n)
        c = complex(np.exp(1j * rng.uniform(-math.pi, math.pi)))
        b, det_b = block_unitary_embed_det(u, c)
        z = 0.5 * complex(np.exp(1j * rng.uniform(-math.pi, math.pi)))
        lhs = complex(np.linalg.det(b - z * np.eye(2 * n)))
        rhs = (1.0 - z) ** n * complex(np.linalg.det(u - z * np.eye(n)))
        det_err = max(det_err, abs(det_b - complex(np.linalg.det(u))), abs(lhs - rhs) / max(1.0, abs(rhs)))

    proj_err = 0.0
    for trial in range(pairs):
        pair = _random_qpair(rng, trial)
        p = build_p_projection(pair)
        brute = resonance_projection_bruteforce(pair)
        proj_err = max(
            proj_err,
            float(np.max(np.abs(brute + p.matrix))),
            float(np.max(np.abs(p.matrix @ p.matrix - p.matrix))),
            float(np.max(np.abs(p.matrix - p.matrix.conj().T))),
            abs(float(np.trace(p.matrix).real) - p.dim),
        )
    return {"pseudo_inverse": pinv_err, "determinant": det_err, "projection": proj_err}
