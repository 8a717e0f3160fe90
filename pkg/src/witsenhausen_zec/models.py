from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .const import (
    DEFAULT_A_GRID,
    DEFAULT_ABS_TOL,
    DEFAULT_GAMMA_GRID,
    DEFAULT_HERMITE_NODES,
    DEFAULT_MAX_DOUBLINGS,
    DEFAULT_MAX_SUBDIVISIONS,
    DEFAULT_MC_BATCH,
    DEFAULT_MC_SAMPLES,
    DEFAULT_MC_SEED,
    DEFAULT_REFINE_TOL,
    DEFAULT_REL_TOL,
    MIN_MC_SAMPLES,
    MIN_NODE_COUNT,
)
from .exc import DomainError


@dataclass(frozen=True)
class ProblemParams:
    """Source variance Q and channel-noise variance N."""

    Q: float
    N: float

    def __post_init__(self) -> None:
        """Validate the instance."""
        if not (math.isfinite(self.Q) and self.Q > 0):
            raise DomainError(f"Q must be positive and finite, got {self.Q}")
        if not (math.isfinite(self.N) and self.N > 0):
            raise DomainError(f"N must be positive and finite, got {self.N}")

    @property
    def sign_gain(self) -> float:
        """Return E|X0| = sqrt(2Q/pi), the vertex of the power quadratic."""
        return math.sqrt(2.0 * self.Q / math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and node counts for the quadrature engine."""

    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS
    hermite_nodes: int = DEFAULT_HERMITE_NODES
    max_doublings: int = DEFAULT_MAX_DOUBLINGS

    def __post_init__(self) -> None:
        """Validate the config."""
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("Quadrature tolerances must be positive")
        if self.max_subdivisions < MIN_NODE_COUNT:
            raise DomainError(f"max_subdivisions must be >= {MIN_NODE_COUNT}")
        if self.hermite_nodes < MIN_NODE_COUNT:
            raise DomainError(f"hermite_nodes must be >= {MIN_NODE_COUNT}")
        if self.max_doublings < 1:
            raise DomainError("max_doublings must be >= 1")


@dataclass(frozen=True)
class SearchConfig:
    """Grid densities and refinement tolerance for the Non-ZEC minimisation."""

    gamma_points: int = DEFAULT_GAMMA_GRID
    a_points: int = DEFAULT_A_GRID
    refine_tol: float = DEFAULT_REFINE_TOL

    def __post_init__(self) -> None:
        """Validate the config."""
        if self.gamma_points < 2 or self.a_points < 2:
            raise DomainError("Search grids need at least 2 points per axis")
        if self.refine_tol <= 0:
            raise DomainError("refine_tol must be positive")


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sample count, seed and batch size of a Monte-Carlo run."""

    samples: int = DEFAULT_MC_SAMPLES
    seed: int = DEFAULT_MC_SEED
    batch: int = DEFAULT_MC_BATCH
    threads: int = 1

    def __post_init__(self) -> None:
        """Validate the config."""
        if self.samples < MIN_MC_SAMPLES:
            raise DomainError(f"samples must be >= {MIN_MC_SAMPLES}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.batch < 1:
            raise DomainError("batch must be positive")
        if self.threads < 1:
            raise DomainError("threads must be positive")

    def with_samples(self, samples: int) -> MonteCarloConfig:
        """Return a copy with a different sample count."""
        return replace(self, samples=samples)


@dataclass(frozen=True)
class Infeasible:
    """No admissible design exists for the requested operating point."""

    reason: str


CostResult = Union[float, Infeasible]


def is_feasible(result: object) -> bool:
    """Return True if the result is a value rather than Infeasible."""
    return not isinstance(result, Infeasible)
