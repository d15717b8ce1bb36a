"""The six edge symbols of the hexagon and the winding of their pointwise determinant.

Edges are traversed in the order 1..6 starting from the lower-left corner:

    edge 1  s in [-inf, +inf]    I + 1/2 [[1, phi(s)], [conj(phi(s)), 1]] (x) (S(1) - I)
    edge 2  l in [0, +inf]       I + 1/2 [[1, -1], [-1, 1]] (x) (S(e^{2l}) - I)
    edge 3  xi in [+inf, 0]      I
    edge 4  s in [+inf, -inf]    I - 1/(1 + 2is) [[1, 1], [1, 1]] (x) P_p
    edge 5  xi in [0, +inf]      I
    edge 6  l in [+inf, 0]       I + 1/2 [[1, 1], [1, 1]] (x) (S(e^{-2l}) - I)

S is the partial-wave scattering matrix truncated to m = -l_max..l_max.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .config import HexagonConfig
from .levinson import Regularizer
from .models import ExtrapolationError, HexagonTrace, InconclusiveWindingError, PhaseShiftTable, PPProjection
from .threshold_algebra import block_unitary_embed_det, embed_p_projection, gamma4_det, unwrapped_argument
from .util import ordered_map

logger = logging.getLogger(__name__)

EDGES = (1, 2, 3, 4, 5, 6)
EDGE_ENDPOINTS: dict[int, tuple[float, float]] = {
    1: (-math.inf, math.inf),
    2: (0.0, math.inf),
    3: (math.inf, 0.0),
    4: (math.inf, -math.inf),
    5: (0.0, math.inf),
    6: (math.inf, 0.0),
}
RESIDUAL_LIMIT = 0.1
STEP_LIMIT = 0.9 * math.pi
_BATCH = 128


def phi_symbol(s: float) -> complex:
    """-tanh(pi s) + i / cosh(pi s); -1 at +inf and +1 at -inf."""
    if math.isinf(s):
        return complex(-math.copysign(1.0, s), 0.0)
    x = math.pi * s
    if abs(x) > 350.0:
        return complex(-math.copysign(1.0, x), 0.0)
    return complex(-math.tanh(x), 1.0 / math.cosh(x))


def vartheta_symbol(s: float) -> float:
    if math.isinf(s):
        return 0.0 if s > 0 else 1.0
    return 0.5 * (1.0 - math.tanh(math.pi * s))


class SMatrixProvider:
    """Diagonal S(lambda) from a phase table, interpolated with PCHIP in ln lambda.

    lambda = 0 and lambda = inf return the limits S = I. Any other energy outside
    the tabulated range raises ExtrapolationError.
    """

    def __init__(self, table: PhaseShiftTable) -> None:
        self.table = table
        self.l_max = table.l_max
        logs = np.log(table.lambdas)
        self._lo = float(table.lambdas[0])
        self._hi = float(table.lambdas[-1])
        self._deltas = PchipInterpolator(logs, table.deltas, axis=1)
        self._tail = PchipInterpolator(logs, table.tail)
        self._mult = table.multiplicities()
        self._order = np.abs(np.arange(-self.l_max, self.l_max + 1))

    @property
    def size(self) -> int:
        return 2 * self.l_max + 1

    def _logs(self, lams: np.ndarray) -> np.ndarray:
        outside = (lams < self._lo * (1 - 1e-12)) | (lams > self._hi * (1 + 1e-12))
        if np.any(outside):
            bad = float(lams[np.flatnonzero(outside)[0]])
            raise ExtrapolationError(
                f"lambda={bad:.6e} outside tabulated range [{self._lo:.6e}, {self._hi:.6e}]; extend the table"
            )
        return np.log(np.clip(lams, self._lo, self._hi))

    @staticmethod
    def _is_limit(lam: float) -> bool:
        return lam == 0.0 or math.isinf(lam)

    def deltas(self, lam: float) -> np.ndarray:
        return self._deltas(self._logs(np.array([float(lam)])))[:, 0]

    def matrix(self, lam: float) -> np.ndarray:
        if self._is_limit(lam):
            return np.eye(self.size, dtype=complex)
        return np.diag(np.exp(2j * self.deltas(lam)[self._order]))

    def det(self, lam: float) -> complex:
        if self._is_limit(lam):
            return 1.0 + 0.0j
        return complex(np.exp(2j * float(self._mult @ self.deltas(lam))))

    def regularized_det(self, lams: np.ndarray, regularizer: Regularizer) -> np.ndarray:
        """det S(lambda) * exp(2i tail) * det beta(lambda); 1 in both limits."""
        lams = np.asarray(lams, dtype=float)
        out = np.ones(lams.shape, dtype=complex)
        inner = ~((lams == 0.0) | np.isinf(lams))
        if np.any(inner):
            logs = self._logs(lams[inner])
            theta = self._mult @ self._deltas(logs) + self._tail(logs)
            out[inner] = np.exp(1j * (2.0 * theta + regularizer.trace(lams[inner])))
        return out


def _edge_energy(edge: int, t: float) -> float:
    if edge == 1:
        return 1.0
    if math.isinf(t):
        return math.inf if edge == 2 else 0.0
    return math.exp(2.0 * t) if edge == 2 else math.exp(-2.0 * t)


def edge_value(edge: int, t: float, provider: SMatrixProvider, p_proj: PPProjection) -> np.ndarray:
    """The 2N x 2N matrix of one edge at parameter ``t``."""
    n = provider.size
    if edge in (3, 5):
        return np.eye(2 * n, dtype=complex)
    if edge == 4:
        if math.isinf(t):
            return np.eye(2 * n, dtype=complex)
        p = embed_p_projection(p_proj, provider.l_max)
        u = np.eye(n, dtype=complex) - 2.0 * p / complex(1.0, 2.0 * t)
        return block_unitary_embed_det(u, 1.0)[0]
    if edge not in EDGES:
        raise ValueError(f"edge must be one of 1..6, got {edge}")
    c = phi_symbol(t) if edge == 1 else (-1.0 if edge == 2 else 1.0)
    return block_unitary_embed_det(provider.matrix(_edge_energy(edge, t)), c)[0]


def _reduced_det(edge: int, t: float, provider: SMatrixProvider, p_proj: PPProjection) -> complex:
    if edge in (3, 5):
        return 1.0 + 0.0j
    if edge == 4:
        return gamma4_det(t, p_proj.dim)
    return provider.det(_edge_energy(edge, t))


def edge_determinant(
    edge: int,
    t: float,
    provider: SMatrixProvider,
    p_proj: PPProjection,
) -> tuple[complex, complex]:
    """(reduced-formula determinant, direct determinant of the block matrix)."""
    reduced = _reduced_det(edge, t, provider, p_proj)
    block = complex(np.linalg.det(edge_value(edge, t, provider, p_proj)))
    return reduced, block


def vertex_gaps(provider: SMatrixProvider, p_proj: PPProjection) -> list[float]:
    """Largest entry mismatch at each vertex, from the end of edge i to the start of edge i + 1."""
    out: list[float] = []
    for edge in EDGES:
        nxt = edge % 6 + 1
        a = edge_value(edge, EDGE_ENDPOINTS[edge][1], provider, p_proj)
        b = edge_value(nxt, EDGE_ENDPOINTS[nxt][0], provider, p_proj)
        out.append(float(np.max(np.abs(a - b))))
    return out


@dataclass
class _EdgeSamples:
    edge: int
    params: np.ndarray
    energies: np.ndarray | None = None


def _s_grid(samples: int) -> np.ndarray:
    u = np.linspace(-0.5 * math.pi, 0.5 * math.pi, samples)
    s = np.tan(u)
    s[0], s[-1] = -math.inf, math.inf
    return s


def _xi_grid(samples: int) -> np.ndarray:
    xi = np.tan(np.linspace(0.0, 0.5 * math.pi, samples))
    xi[-1] = math.inf
    return xi


def _sample_edges(table: PhaseShiftTable, cfg: HexagonConfig) -> list[_EdgeSamples]:
    lams = table.lambdas
    above = np.concatenate([[1.0], lams[lams > 1.0], [math.inf]])
    below = np.concatenate([[0.0], lams[lams < 1.0], [1.0]])
    with np.errstate(divide="ignore"):
        ell_up = 0.5 * np.log(above)
        ell_down = -0.5 * np.log(below)
    s = _s_grid(cfg.s_samples)
    xi = _xi_grid(cfg.xi_samples)
    return [
        _EdgeSamples(1, s, np.ones(s.size)),
        _EdgeSamples(2, ell_up, above),
        _EdgeSamples(3, xi[::-1].copy()),
        _EdgeSamples(4, s[::-1].copy()),
        _EdgeSamples(5, xi),
        _EdgeSamples(6, ell_down, below),
    ]


def _block_check(
    item: tuple[int, np.ndarray],
    provider: SMatrixProvider,
    p_proj: PPProjection,
) -> tuple[float, float]:
    edge, params = item
    mats = np.stack([edge_value(edge, float(t), provider, p_proj) for t in params])
    block = np.linalg.det(mats)
    reduced = np.array([_reduced_det(edge, float(t), provider, p_proj) for t in params])
    eye = np.eye(mats.shape[1])
    defect = np.abs(np.conj(np.transpose(mats, (0, 2, 1))) @ mats - eye).max()
    return float(np.max(np.abs(block - reduced))), float(defect)


def hexagon_winding(
    table: PhaseShiftTable,
    p_proj: PPProjection,
    regularizer: Regularizer,
    config: HexagonConfig | None = None,
    *,
    workers: int = 1,
    unitarity_tol: float = 1e-8,
) -> HexagonTrace:
    """Winding of the regularised determinant loop, in the configured orientation.

    ``edge_windings`` are anticlockwise turns per edge; ``winding`` is the
    orientation-adjusted total, expected to equal the number of bound states.
    """
    cfg = config or HexagonConfig()
    provider = SMatrixProvider(table)
    edges = _sample_edges(table, cfg)

    values: list[np.ndarray] = []
    for item in edges:
        if item.edge in (1, 2, 6):
            values.append(provider.regularized_det(item.energies, regularizer))
        elif item.edge == 4:
            values.append(np.array([gamma4_det(float(s), p_proj.dim) for s in item.params]))
        else:
            values.append(np.ones(item.params.size, dtype=complex))

    chunks = [
        (item.edge, item.params[i : i + _BATCH])
        for item in edges
        if item.edge not in (3, 5)
        for i in range(0, item.params.size, _BATCH)
    ]
    checks = ordered_map(lambda chunk: _block_check(chunk, provider, p_proj), chunks, workers)
    det_agreement = max((c[0] for c in checks), default=0.0)
    unitarity = max((c[1] for c in checks), default=0.0)
    if det_agreement > unitarity_tol or unitarity > unitarity_tol:
        logger.warning("edge determinants: block/reduced gap %.3e, unitarity defect %.3e", det_agreement, unitarity)

    loop = np.concatenate(values)
    arg = unwrapped_argument(loop)
    bounds = np.cumsum([0] + [v.size for v in values])
    unwrapped: dict[int, list[float]] = {}
    edge_windings: dict[int, float] = {}
    samples: dict[int, list[tuple[float, complex]]] = {}
    for item, lo, hi in zip(edges, bounds[:-1], bounds[1:]):
        piece = arg[lo:hi]
        unwrapped[item.edge] = piece.tolist()
        edge_windings[item.edge] = float((piece[-1] - piece[0]) / (2.0 * math.pi))
        samples[item.edge] = [(float(t), complex(v)) for t, v in zip(item.params, loop[lo:hi])]

    accumulated = float(arg[-1] - arg[0])
    value = cfg.orientation * accumulated / (2.0 * math.pi)
    winding = int(round(value))
    residual = abs(value - winding)
    max_step = float(np.max(np.abs(np.diff(arg)))) if arg.size > 1 else 0.0

    trace = HexagonTrace(
        edges=samples,
        unwrapped=unwrapped,
        edge_windings=edge_windings,
        accumulated=accumulated,
        winding=winding,
        residual=residual,
        max_step=max_step,
        det_agreement=det_agreement,
        unitarity_defect=unitarity,
        vertex_gaps=vertex_gaps(provider, p_proj),
        orientation=cfg.orientation,
    )
    logger.info("hexagon winding %d (residual %.2e, max step %.3f)", winding, residual, max_step)
    if residual > RESIDUAL_LIMIT or max_step > STEP_LIMIT:
        budget = {f"edge_{e}": w for e, w in edge_windings.items()}
        budget.update(residual=residual, max_step=max_step)
        raise InconclusiveWindingError(
            f"hexagon winding inconclusive: residual {residual:.3f}, largest argument step {max_step:.3f}",
            budget,
        )
    return trace


def trace_rows(trace: HexagonTrace) -> list[list[object]]:
    """CSV rows: edge, parameter, Re(det), Im(det), unwrapped argument."""
    rows: list[list[object]] = []
    for edge in EDGES:
        for (t, det), arg in zip(trace.edges.get(edge, []), trace.unwrapped.get(edge, [])):
            rows.append([edge, t, det.real, det.imag, arg])
    return rows
