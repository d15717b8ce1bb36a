from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

ThresholdKind = Literal["regular", "s_resonance", "p_resonance", "zero_eigenvalue"]
RunStatus = Literal["pass", "fail", "near_threshold", "exploratory", "error"]


class LevlabError(RuntimeError):
    """Root of every numerical failure raised by levlab."""


class SpecialFunctionDomainError(ValueError):
    pass


class QuadratureError(LevlabError):
    def __init__(self, message: str, achieved_error: float) -> None:
        super().__init__(f"{message} (achieved error {achieved_error:.3e})")
        self.achieved_error = achieved_error


class IntegrationError(LevlabError):
    pass


class MatchingDegeneracyError(LevlabError):
    pass


class GridRefinementError(LevlabError):
    def __init__(self, message: str, interval: tuple[float, float]) -> None:
        super().__init__(f"{message}: lambda in [{interval[0]:.6e}, {interval[1]:.6e}]")
        self.interval = interval


class ExteriorFitError(LevlabError):
    def __init__(self, message: str, condition_number: float) -> None:
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class OracleMismatchError(LevlabError):
    pass


class PseudoInverseDegeneracyError(ValueError):
    pass


class ExtrapolationError(LevlabError):
    pass


class NormalizationAmbiguityError(LevlabError):
    pass


class InconclusiveWindingError(LevlabError):
    def __init__(self, message: str, budget: dict[str, float]) -> None:
        super().__init__(message)
        self.budget = budget


@dataclass(frozen=True)
class BesselValue:
    order: int
    argument: float
    value: float
    derivative: float


@dataclass(frozen=True)
class Channel:
    """Angular channel |m| = ell; the +ell and -ell waves are degenerate for radial V."""

    ell: int

    @property
    def multiplicity(self) -> int:
        return 1 if self.ell == 0 else 2


@dataclass
class GridSpec:
    lambda_min: float
    lambda_max: float
    count: int
    spacing: str = "log"

    def points(self) -> np.ndarray:
        return np.geomspace(self.lambda_min, self.lambda_max, self.count)


@dataclass
class PhaseShiftTable:
    """Branch-continuous phase shifts on an increasing energy grid.

    ``deltas[ell]`` is aligned with ``lambdas``. ``tail`` is the Born estimate of
    the multiplicity-weighted phase carried by channels above ``l_max``.
    """

    lambdas: np.ndarray
    deltas: np.ndarray
    l_max: int
    grid: GridSpec
    tail: np.ndarray
    refined_points: int = 0

    def multiplicities(self) -> np.ndarray:
        return np.array([Channel(ell).multiplicity for ell in range(self.l_max + 1)], dtype=float)

    def channel_phase(self) -> np.ndarray:
        """Sum over ell <= l_max of m_ell * delta_ell(lambda)."""
        return self.multiplicities() @ self.deltas

    def total_phase(self) -> np.ndarray:
        """Half the argument of det S(lambda), including the high-partial-wave tail."""
        return self.channel_phase() + self.tail


@dataclass(frozen=True)
class ThresholdClass:
    ell: int
    kind: ThresholdKind
    c_grow: float
    c_decay: float
    confidence: float
    condition_number: float = 1.0


@dataclass
class SpectralCount:
    per_channel: list[int]
    zero_energy: list[bool]
    oracle_total: int | None = None

    @property
    def total(self) -> int:
        out = 0
        for ell, (count, zero) in enumerate(zip(self.per_channel, self.zero_energy)):
            out += Channel(ell).multiplicity * (count + int(zero))
        return out


@dataclass(frozen=True)
class PPProjection:
    matrix: np.ndarray
    dim: int


@dataclass
class HexagonTrace:
    edges: dict[int, list[tuple[float, complex]]]
    unwrapped: dict[int, list[float]]
    edge_windings: dict[int, float]
    accumulated: float
    winding: int
    residual: float
    max_step: float
    det_agreement: float
    unitarity_defect: float = 0.0
    vertex_gaps: list[float] = field(default_factory=list)
    orientation: int = -1


@dataclass
class SSFCurve:
    """xi(lambda) on the table grid; ``deltas`` keeps the channel phases it was built from."""

    lambdas: np.ndarray
    xi: np.ndarray
    moment: float
    branch: int
    deltas: np.ndarray | None = None
    tail_low: float = 0.0


@dataclass(frozen=True)
class ZeroLimit:
    value: float
    uncertainty: float
    nearest_integer: int


@dataclass
class LevinsonReport:
    winding_term: float
    moment_term: float
    p_dim: int
    sigma_p: int
    residual: float
    status: RunStatus
    grid: dict[str, Any] = field(default_factory=dict)
    error_budget: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)
    corollary: dict[str, Any] = field(default_factory=dict)
    thresholds: list[ThresholdClass] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
