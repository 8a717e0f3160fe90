"""The Non-ZEC scheme: W2 = a*S flipped with crossover probability gamma.

The decoder still learns W1 but only a noisy copy of W2, so the information
constraint relaxes by H2(gamma) - h(Y1 | W1, W2) + 1/2 log2(2 pi e N) while
the estimation cost becomes F(a, gamma) = a^2 - a^2/2 * int int I.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .const import (
    ADMISSIBLE_SLACK_TOL,
    CLAMP_WARN_TOL,
    DEFAULT_A_GRID,
    GAMMA_MAX,
    MIN_ZEC_GRID,
    ROOT_XTOL,
    V1_TOL,
    WINDOW_SIGMAS,
)
from .core_math import (
    ArrayOrFloat,
    FloatArray,
    GaussianMixture1D,
    binary_entropy_bits,
    integrate_1d,
    integrate_2d,
    mixture_entropy_bits,
)
from .exc import DomainError
from .models import (
    Infeasible,
    ProblemParams,
    QuadratureConfig,
    SearchConfig,
)
from .zec import admissible_zec, checked_v1, output_entropy_bits, power_interval

_LOGGER = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class NonZecDesign:
    """A Non-ZEC control design (a, gamma) at power P."""

    a: float
    gamma: float
    V1: float
    P: float

    def __post_init__(self) -> None:
        """Validate the design."""
        if self.a < 0:
            raise DomainError(f"a must be nonnegative, got {self.a}")
        if not 0.0 <= self.gamma <= GAMMA_MAX:
            raise DomainError(f"gamma must lie in [0, {GAMMA_MAX}], got {self.gamma}")
        if self.V1 < -V1_TOL:
            raise DomainError(f"a={self.a} needs more power than P={self.P}")


@dataclass(frozen=True)
class CostSurfaceSample:
    """One (a, gamma, P) point of the Non-ZEC cost region."""

    a: float
    gamma: float
    P: float
    F_value: float
    info_slack: float
    admissible: bool


@dataclass(frozen=True)
class InfoTerms:
    """The entropy decomposition behind the Non-ZEC information constraint."""

    h_y: float
    h2_gamma: float
    h_y_given_w: float
    h_w: float = 1.0

    @property
    def slack(self) -> float:
        """Return h(Y1) + H2(gamma) - h(Y1 | W1, W2) - h(W)."""
        return self.h_y + self.h2_gamma - self.h_y_given_w - self.h_w


def _check_gamma(gamma: float, upper: float = 1.0) -> None:
    if not 0.0 <= gamma <= upper:
        raise DomainError(f"gamma must lie in [0, {upper}], got {gamma}")


def conditional_mixture(a: float, gamma: float, p: ProblemParams) -> GaussianMixture1D:
    """Return the law of Y1 - W1 given W2 = +a: (1-gamma) N(a, N) + gamma N(-a, N)."""
    return GaussianMixture1D.antipodal(a, p.N, weight_plus=1.0 - gamma)


def cond_entropy_y_given_w(
    a: float, gamma: float, p: ProblemParams, cfg: QuadratureConfig
) -> float:
    """Return h(Y1 | W1, W2) in bits."""
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    _check_gamma(gamma)
    return mixture_entropy_bits(conditional_mixture(a, gamma, p), cfg)


def info_terms(
    a: float, gamma: float, P: float, p: ProblemParams, cfg: QuadratureConfig
) -> InfoTerms:
    """Return the entropy terms of the constraint at (a, gamma, P)."""
    _check_gamma(gamma)
    return InfoTerms(
        h_y=output_entropy_bits(a, P, p, cfg),
        h2_gamma=binary_entropy_bits(gamma),
        h_y_given_w=cond_entropy_y_given_w(a, gamma, p, cfg),
    )


def info_slack_nonzec(
    a: float, gamma: float, P: float, p: ProblemParams, cfg: QuadratureConfig
) -> float:
    """Return h(Y1) + H2(gamma) - h(Y1 | W1, W2) - 1 in bits."""
    return info_terms(a, gamma, P, p, cfg).slack


def _half_logit(gamma: float) -> float:
    """Return 1/2 log((1 - gamma) / gamma); infinite at the pure ends."""
    return 0.5 * float(special.logit(1.0 - gamma))


def posterior_mean(
    w1: ArrayOrFloat,
    w2_sign: ArrayOrFloat,
    y1: ArrayOrFloat,
    a: float,
    gamma: float,
    N: float,
) -> ArrayOrFloat:
    """Return E[X1 | W1, W2, Y1] for the Non-ZEC scheme.

    With W2 = +a this is w1 + a((1-gamma)G1 - gamma G2)/((1-gamma)G1 + gamma G2),
    written as w1 + a tanh(a(y1 - w1)/N + 1/2 logit(1 - gamma)); W2 = -a flips
    the sign of the logit term.
    """
    _check_gamma(gamma)
    shift = _half_logit(gamma)
    return w1 + a * np.tanh(a * (y1 - w1) / N + np.sign(w2_sign) * shift)


def _normal_pdf(x: ArrayOrFloat, variance: float) -> ArrayOrFloat:
    return _INV_SQRT_2PI / math.sqrt(variance) * np.exp(-0.5 * x * x / variance)


def mmse_integrand(
    w1: ArrayOrFloat,
    y1: ArrayOrFloat,
    a: float,
    gamma: float,
    V1: float,
    p: ProblemParams,
) -> ArrayOrFloat:
    """Evaluate I(w1, y1).

    I = G0 [ (uG1 + vG2) tanh^2(theta + l) + (vG1 + uG2) tanh^2(theta - l) ]
    with u = 1 - gamma, v = gamma, theta = a(y1 - w1)/N and l = 1/2 log(u/v),
    which equals the two squared-difference brackets without 0/0 at the pure
    ends. V1 = 0 gives the section at w1 with G0 replaced by unit mass.
    """
    _check_gamma(gamma)
    if V1 < 0:
        raise DomainError(f"V1 must be nonnegative, got {V1}")
    t = y1 - w1
    g0 = _normal_pdf(w1, V1) if V1 > 0 else 1.0
    g1 = _normal_pdf(t - a, p.N)
    g2 = _normal_pdf(t + a, p.N)
    if gamma in (0.0, 1.0):
        return g0 * (g1 + g2)
    u, v = 1.0 - gamma, gamma
    theta = a * t / p.N
    shift = _half_logit(gamma)
    return g0 * (
        (u * g1 + v * g2) * np.tanh(theta + shift) ** 2
        + (v * g1 + u * g2) * np.tanh(theta - shift) ** 2
    )


def _sech(x: FloatArray) -> FloatArray:
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)  # type: ignore[no-any-return]


def _fibre_residual(t: FloatArray, a: float, gamma: float, N: float) -> FloatArray:
    """Return G1 + G2 - I/G0 on the fibre y1 = w1 + t.

    It equals 2 sqrt(uv) sqrt(G1 G2) [sech(theta + l) + sech(theta - l)] and
    sqrt(G1 G2) = N(0, N)(t) exp(-a^2 / 2N).
    """
    shift = _half_logit(gamma)
    theta = a * t / N
    envelope = _normal_pdf(t, N) * math.exp(-0.5 * a * a / N)
    sech_sum = _sech(theta + shift) + _sech(theta - shift)
    return 2.0 * math.sqrt(gamma * (1.0 - gamma)) * envelope * sech_sum  # type: ignore[no-any-return]


def _clamp_cost(value: float, a: float, gamma: float) -> float:
    upper = a * a
    if value < -CLAMP_WARN_TOL or value > upper + CLAMP_WARN_TOL:
        _LOGGER.warning(
            "F(a=%s, gamma=%s)=%s left [0, %s]; clamping quadrature noise",
            a,
            gamma,
            value,
            upper,
        )
    return min(max(value, 0.0), upper)


def cost_F(
    a: float, gamma: float, P: float, p: ProblemParams, cfg: QuadratureConfig
) -> float:
    """Return F(a, gamma, P) = a^2 - a^2/2 * int int I(w1, y1) dw1 dy1.

    The plane is parametrised by (w1, t = y1 - w1). G0 (G1 + G2) integrates
    to 2 exactly, so only the residual G0 * R(t) goes to quadrature.
    With V1 = 0 the raw section I(0, t) is integrated in one dimension.
    """
    _check_gamma(gamma)
    v1 = checked_v1(a, P, p)
    if a == 0 or gamma in (0.0, 1.0):
        return 0.0
    if v1 <= V1_TOL:
        shift_point = _half_logit(gamma) * p.N / a
        half_width = a + WINDOW_SIGMAS * math.sqrt(p.N)
        total = integrate_1d(
            lambda t: float(mmse_integrand(0.0, t, a, gamma, 0.0, p)),
            (-half_width, half_width),
            cfg,
            points=sorted({-a, a, -shift_point, shift_point}),
        )
        value = a * a - 0.5 * a * a * total
    else:
        hints = (GaussianMixture1D.single(0.0, v1), GaussianMixture1D.single(0.0, p.N))
        residual = integrate_2d(
            lambda w1, t: _normal_pdf(w1, v1) * _fibre_residual(t, a, gamma, p.N),
            hints,
            cfg,
        )
        value = 0.5 * a * a * residual
    return _clamp_cost(value, a, gamma)


class _SlackCache:
    """Memoise h(Y1) per a and h(Y1 | W) per (a, gamma) at one power."""

    def __init__(self, P: float, p: ProblemParams, cfg: QuadratureConfig) -> None:
        """Initialize the cache."""
        self._P = P
        self._p = p
        self._cfg = cfg
        self._h_y: dict[float, float] = {}
        self._h_cond: dict[tuple[float, float], float] = {}

    def slack(self, a: float, gamma: float) -> float:
        if a not in self._h_y:
            self._h_y[a] = output_entropy_bits(a, self._P, self._p, self._cfg)
        if (a, gamma) not in self._h_cond:
            self._h_cond[(a, gamma)] = cond_entropy_y_given_w(
                a, gamma, self._p, self._cfg
            )
        return (
            self._h_y[a]
            + binary_entropy_bits(gamma)
            - self._h_cond[(a, gamma)]
            - 1.0
        )


def _a_grid(interval: tuple[float, float], points: int) -> FloatArray:
    lo, hi = interval
    return np.linspace(lo, hi, points) if hi > lo else np.array([lo])


class _ConstraintBoundary:
    """Follow the least admissible gamma as a function of a at one power.

    The slack rises with gamma on [0, 1/2] and F rises with it too, so for a
    fixed a the cheapest admissible design sits at the smallest admissible
    gamma. Costs along that curve are memoised per a.
    """

    def __init__(
        self,
        P: float,
        p: ProblemParams,
        cfg: QuadratureConfig,
        gammas: Sequence[float],
    ) -> None:
        """Initialize the boundary tracker."""
        self._P = P
        self._p = p
        self._cfg = cfg
        self._gammas = gammas
        self._slacks = _SlackCache(P, p, cfg)
        self._points: dict[float, tuple[float, float] | None] = {}

    def least_gamma(self, a: float) -> float | None:
        """Return the smallest admissible gamma at a, or None if 1/2 fails too."""
        below: float | None = None
        for gamma in self._gammas:
            slack = self._slacks.slack(a, gamma)
            if slack >= -ADMISSIBLE_SLACK_TOL:
                break
            below = gamma
        else:
            return None
        if below is None or slack <= 0.0:
            return gamma
        root = optimize.brentq(
            lambda g: self._slacks.slack(a, float(g)), below, gamma, xtol=ROOT_XTOL
        )
        # Step past the bracketing error onto the admissible side
        return min(float(root) + 2.0 * ROOT_XTOL, gamma)

    def point(self, a: float) -> tuple[float, float] | None:
        """Return (F, gamma) at the least admissible gamma for a."""
        if a not in self._points:
            gamma = self.least_gamma(a)
            self._points[a] = (
                None
                if gamma is None
                else (cost_F(a, gamma, self._P, self._p, self._cfg), gamma)
            )
        return self._points[a]


def s_nonzec(
    P: float,
    p: ProblemParams,
    cfg: QuadratureConfig,
    search: SearchConfig | None = None,
) -> tuple[float, NonZecDesign] | Infeasible:
    """Return min F over admissible (a, gamma) at P with its argmin.

    The minimum lies on the constraint boundary, so every a of the grid is
    paired with its least admissible gamma (scanned on the gamma grid, then
    root-found) and the best cell is polished along that boundary.
    """
    search = search or SearchConfig()
    if (interval := power_interval(P, p)) is None:
        return Infeasible(f"P={P} is below the least two-point power")

    zec = admissible_zec(P, p, cfg, grid=max(search.a_points, MIN_ZEC_GRID))
    if not zec.is_empty:
        a = float(zec.argmax_a)
        return 0.0, NonZecDesign(a=a, gamma=0.0, V1=checked_v1(a, P, p), P=P)

    gammas = [float(g) for g in np.linspace(0.0, GAMMA_MAX, search.gamma_points)]
    boundary = _ConstraintBoundary(P, p, cfg, gammas)
    a_grid = _a_grid(interval, search.a_points)
    costs: list[float] = []
    for a in a_grid:
        point = boundary.point(float(a))
        costs.append(math.inf if point is None else point[0])
    if not any(math.isfinite(c) for c in costs):
        return Infeasible(f"P={P}: no (a, gamma) meets the Non-ZEC information constraint")
    if _LOGGER.isEnabledFor(logging.DEBUG):
        _LOGGER.debug(
            "P=%s: %s of %s grid values of a reach the constraint by gamma=%s",
            P,
            sum(math.isfinite(c) for c in costs),
            len(costs),
            GAMMA_MAX,
        )

    value, a, gamma = _refine_along_boundary(boundary, a_grid, costs, search)
    _LOGGER.debug("P=%s: S_NonZEC=%s at a=%s, gamma=%s", P, value, a, gamma)
    return value, NonZecDesign(a=a, gamma=gamma, V1=checked_v1(a, P, p), P=P)


def _refine_along_boundary(
    boundary: _ConstraintBoundary,
    a_grid: FloatArray,
    costs: Sequence[float],
    search: SearchConfig,
) -> tuple[float, float, float]:
    """Polish the best grid point inside its neighbouring cells."""
    best = int(np.argmin(costs))
    a_best = float(a_grid[best])
    start = boundary.point(a_best)
    assert start is not None  # nosec
    value, gamma = start
    if a_grid.size < 3:
        return float(value), a_best, float(gamma)
    lo = float(a_grid[max(best - 1, 0)])
    hi = float(a_grid[min(best + 1, a_grid.size - 1)])
    penalty = float(a_grid[-1]) ** 2 + 1.0

    def objective(a: float) -> float:
        point = boundary.point(float(a))
        return penalty if point is None else point[0]

    result = optimize.minimize_scalar(
        objective, bounds=(lo, hi), method="bounded", options={"xatol": search.refine_tol}
    )
    if result.success and (point := boundary.point(float(result.x))) is not None:
        if point[0] < value:
            return float(point[0]), float(result.x), float(point[1])
    return float(value), a_best, float(gamma)


def cost_region(
    P_grid: Sequence[float],
    gamma_list: Iterable[float],
    p: ProblemParams,
    cfg: QuadratureConfig,
    a_points: int = DEFAULT_A_GRID,
) -> list[CostSurfaceSample]:
    """Return every admissible (a, gamma, P) sample with its cost."""
    gammas = list(gamma_list)
    if not P_grid or not gammas:
        raise DomainError("cost_region needs a nonempty P grid and gamma list")
    for gamma in gammas:
        _check_gamma(gamma, GAMMA_MAX)
    samples: list[CostSurfaceSample] = []
    for P in P_grid:
        if (interval := power_interval(P, p)) is None:
            continue
        slacks = _SlackCache(P, p, cfg)
        for gamma in gammas:
            for a in _a_grid(interval, a_points):
                slack = slacks.slack(float(a), gamma)
                if slack < -ADMISSIBLE_SLACK_TOL:
                    continue
                samples.append(
                    CostSurfaceSample(
                        a=float(a),
                        gamma=gamma,
                        P=P,
                        F_value=cost_F(float(a), gamma, P, p, cfg),
                        info_slack=slack,
                        admissible=True,
                    )
                )
    _LOGGER.debug("cost region: %s admissible samples", len(samples))
    return samples
