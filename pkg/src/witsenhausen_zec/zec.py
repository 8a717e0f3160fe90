"""The zero-estimation-cost scheme X1 = W1 + a*sign(X0).

The decoder learns (W1, W2) through block coding, so the estimation cost is
zero whenever the information constraint

    h(Y1) - 1/2 log2(2 pi e N) - 1 >= 0

holds at a power split P = V1 + P2(a).
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .const import (
    ADMISSIBLE_SLACK_TOL,
    DEFAULT_TOL_P,
    DEFAULT_ZEC_GRID,
    MIN_ZEC_GRID,
    NO_UPPER_BOUND_ADVICE,
    PSTAR_SEARCH_CAP,
    ROOT_XTOL,
    V1_TOL,
)
from .core_math import GaussianMixture1D, gaussian_entropy_bits, mixture_entropy_bits
from .exc import DomainError, MonotonicityError, NoUpperBoundError
from .models import CostResult, Infeasible, ProblemParams, QuadratureConfig
from .two_point import p2_min

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZecDesign:
    """A ZEC control design at power P."""

    a: float
    V1: float
    P: float

    def __post_init__(self) -> None:
        """Validate the design."""
        if self.a < 0:
            raise DomainError(f"a must be nonnegative, got {self.a}")
        if self.V1 < -V1_TOL:
            raise DomainError(f"a={self.a} needs more power than P={self.P}")


@dataclass(frozen=True)
class AdmissibleInterval:
    """The admissible signal levels of the ZEC scheme at one power."""

    power_interval: tuple[float, float] | None
    feasible_subset: list[tuple[float, float]]
    max_slack: float
    argmax_a: float

    @property
    def is_empty(self) -> bool:
        """Return True if no a satisfies both constraints."""
        return not self.feasible_subset


@dataclass
class PStarResult:
    """The outcome of the P* bisection with its trace."""

    value: float
    lower: float
    upper: float
    argmax_a: float
    evaluations: list[tuple[float, bool]] = field(default_factory=list)


def v1_for(a: float, P: float, p: ProblemParams) -> float:
    """Return V1 = P - (Q + a^2 - 2a sqrt(2Q/pi)); negative means infeasible."""
    return P - (p.Q + a * a - 2.0 * a * p.sign_gain)


def zec_design(a: float, P: float, p: ProblemParams) -> ZecDesign:
    """Return the validated design for signal level a at power P."""
    v1 = v1_for(a, P, p)
    return ZecDesign(a=a, V1=max(v1, 0.0) if v1 >= -V1_TOL else v1, P=P)


def power_interval(P: float, p: ProblemParams) -> tuple[float, float] | None:
    """Return the a-interval with V1 >= 0, or None below P2_min."""
    vertex = p.sign_gain
    discriminant = vertex * vertex - p.Q + P
    if discriminant < -V1_TOL:
        return None
    spread = math.sqrt(max(discriminant, 0.0))
    return max(vertex - spread, 0.0), vertex + spread


def checked_v1(a: float, P: float, p: ProblemParams) -> float:
    """Return V1 clamped at 0, raising DomainError if it is really negative."""
    v1 = v1_for(a, P, p)
    if v1 < -V1_TOL:
        raise DomainError(f"a={a} at P={P}: V1={v1} < 0")
    return max(v1, 0.0)


def output_mixture(a: float, v1: float, p: ProblemParams) -> GaussianMixture1D:
    """Return the law of Y1: 1/2 N(-a, V1 + N) + 1/2 N(+a, V1 + N)."""
    return GaussianMixture1D.antipodal(a, v1 + p.N)


def output_entropy_bits(
    a: float, P: float, p: ProblemParams, cfg: QuadratureConfig
) -> float:
    """Return h(Y1) in bits for the design (a, P)."""
    return mixture_entropy_bits(output_mixture(a, checked_v1(a, P, p), p), cfg)


def info_slack_zec(a: float, P: float, p: ProblemParams, cfg: QuadratureConfig) -> float:
    """Return h(Y1) - 1/2 log2(2 pi e N) - 1 in bits."""
    return output_entropy_bits(a, P, p, cfg) - gaussian_entropy_bits(p.N) - 1.0


def _is_admissible(slack: float) -> bool:
    return slack >= -ADMISSIBLE_SLACK_TOL


def _refine_argmax(
    slack: Callable[[float], float], a_grid: np.ndarray, slacks: list[float]
) -> tuple[float, float]:
    """Polish the best grid point inside its neighbouring cells."""
    best = int(np.argmax(slacks))
    a_best, s_best = float(a_grid[best]), slacks[best]
    if a_grid.size < 3:
        return a_best, s_best
    lo = float(a_grid[max(best - 1, 0)])
    hi = float(a_grid[min(best + 1, a_grid.size - 1)])
    result = optimize.minimize_scalar(
        lambda a: -slack(a), bounds=(lo, hi), method="bounded", options={"xatol": ROOT_XTOL}
    )
    if result.success and -result.fun > s_best:
        return float(result.x), float(-result.fun)
    return a_best, s_best


def _crossing(slack: Callable[[float], float], lo: float, hi: float) -> float:
    """Locate a sign change of the admissibility margin by bisection."""
    return float(
        optimize.bisect(lambda a: slack(a) + ADMISSIBLE_SLACK_TOL, lo, hi, xtol=ROOT_XTOL)
    )


def admissible_zec(
    P: float, p: ProblemParams, cfg: QuadratureConfig, grid: int = DEFAULT_ZEC_GRID
) -> AdmissibleInterval:
    """Scan the power interval at P for a satisfying the information constraint.

    The slack is sampled on a uniform grid, every sign change is refined by
    bisection, and the best grid point is polished to report the maximum.
    """
    if grid < MIN_ZEC_GRID:
        raise DomainError(f"grid must be >= {MIN_ZEC_GRID}, got {grid}")
    if (interval := power_interval(P, p)) is None:
        return AdmissibleInterval(None, [], -math.inf, math.nan)

    def slack(a: float) -> float:
        return info_slack_zec(a, P, p, cfg)

    lo, hi = interval
    a_grid = np.linspace(lo, hi, grid) if hi > lo else np.array([lo])
    slacks = [slack(float(a)) for a in a_grid]
    argmax_a, max_slack = _refine_argmax(slack, a_grid, slacks)

    subset: list[tuple[float, float]] = []
    start: float | None = None
    for i, (a, s) in enumerate(zip(a_grid, slacks)):
        inside = _is_admissible(s)
        if i == 0:
            start = float(a) if inside else None
            continue
        was_inside = _is_admissible(slacks[i - 1])
        if inside and not was_inside:
            start = _crossing(slack, float(a_grid[i - 1]), float(a))
        elif was_inside and not inside:
            assert start is not None  # nosec
            subset.append((start, _crossing(slack, float(a_grid[i - 1]), float(a))))
            start = None
    if start is not None:
        subset.append((start, float(a_grid[-1])))

    if not subset and _is_admissible(max_slack):
        # The feasible set sits between two grid points around the refined peak
        left = float(a_grid[max(int(np.argmax(slacks)) - 1, 0)])
        right = float(a_grid[min(int(np.argmax(slacks)) + 1, a_grid.size - 1)])
        a_lo = _crossing(slack, left, argmax_a) if slack(left) < -ADMISSIBLE_SLACK_TOL else left
        a_hi = _crossing(slack, argmax_a, right) if slack(right) < -ADMISSIBLE_SLACK_TOL else right
        subset.append((a_lo, a_hi))

    if _LOGGER.isEnabledFor(logging.DEBUG):
        _LOGGER.debug(
            "P=%s: power interval [%s, %s], max slack %s at a=%s, "
            "feasible %s (%s grid points admissible)",
            P,
            lo,
            hi,
            max_slack,
            argmax_a,
            subset,
            sum(_is_admissible(s) for s in slacks),
        )
    return AdmissibleInterval(interval, subset, max_slack, argmax_a)


def _zec_feasible(
    P: float, p: ProblemParams, cfg: QuadratureConfig, grid: int
) -> tuple[bool, float]:
    """Return (feasible, best a) stopping at the first admissible grid point."""
    if (interval := power_interval(P, p)) is None:
        return False, math.nan
    lo, hi = interval
    a_grid = np.linspace(lo, hi, grid) if hi > lo else np.array([lo])

    def slack(a: float) -> float:
        return info_slack_zec(a, P, p, cfg)

    slacks: list[float] = []
    for a in a_grid:
        slacks.append(slack(float(a)))
        if _is_admissible(slacks[-1]):
            return True, float(a)
    argmax_a, max_slack = _refine_argmax(slack, a_grid, slacks)
    return _is_admissible(max_slack), argmax_a


def p_star_search(
    p: ProblemParams,
    cfg: QuadratureConfig,
    tol_P: float = DEFAULT_TOL_P,
    grid: int = DEFAULT_ZEC_GRID,
) -> PStarResult:
    """Bisect on P for the smallest power with a nonempty admissible set."""
    if tol_P <= 0:
        raise DomainError(f"tol_P must be positive, got {tol_P}")
    evaluations: list[tuple[float, bool]] = []

    def feasible(P: float) -> tuple[bool, float]:
        ok, a = _zec_feasible(P, p, cfg, grid)
        evaluations.append((P, ok))
        return ok, a

    floor, _ = p2_min(p)
    ok, argmax_a = feasible(floor)
    if ok:
        return PStarResult(floor, floor, floor, argmax_a, evaluations)

    lo, hi = floor, p.Q
    while not (found := feasible(hi))[0]:
        lo, hi = hi, 2.0 * hi
        if hi > PSTAR_SEARCH_CAP * p.Q:
            raise NoUpperBoundError(
                f"Q={p.Q}, N={p.N}: infeasible up to P={lo}: {NO_UPPER_BOUND_ADVICE}"
            )
    argmax_a = found[1]
    first_feasible = hi
    while hi - lo > tol_P:
        mid = 0.5 * (lo + hi)
        ok, a = feasible(mid)
        if ok:
            hi, argmax_a = mid, a
        else:
            lo = mid

    if first_feasible > hi:
        # Probe between the threshold and the bracket top
        feasible(0.5 * (hi + first_feasible))
    _check_feasibility_monotone(p, evaluations)
    _LOGGER.debug(
        "Q=%s, N=%s: P*=%s after %s evaluations", p.Q, p.N, hi, len(evaluations)
    )
    return PStarResult(hi, lo, hi, argmax_a, evaluations)


def _check_feasibility_monotone(
    p: ProblemParams, evaluations: list[tuple[float, bool]]
) -> None:
    """Every infeasible power tried must lie below every feasible one."""
    feasible = [P for P, ok in evaluations if ok]
    infeasible = [P for P, ok in evaluations if not ok]
    if feasible and infeasible and max(infeasible) > min(feasible):
        raise MonotonicityError(
            f"Q={p.Q}, N={p.N}: P={max(infeasible)} infeasible above "
            f"feasible P={min(feasible)}"
        )


def p_star(
    p: ProblemParams,
    cfg: QuadratureConfig,
    tol_P: float = DEFAULT_TOL_P,
    grid: int = DEFAULT_ZEC_GRID,
) -> float:
    """Return P* = min{P : A0(P) nonempty} within tol_P."""
    return p_star_search(p, cfg, tol_P, grid).value


def s_zec(
    P: float, p: ProblemParams, cfg: QuadratureConfig, grid: int = DEFAULT_ZEC_GRID
) -> CostResult:
    """Return 0 if the ZEC scheme is admissible at P, else Infeasible."""
    if admissible_zec(P, p, cfg, grid).is_empty:
        return Infeasible(f"P={P}: no signal level meets the ZEC information constraint")
    return 0.0
