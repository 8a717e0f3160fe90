"""Gaussian primitives, Gaussian-mixture entropies and the quadrature engine.

Entropies are reported in bits. Internally they are integrated in nats and
converted once at the end.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, NamedTuple, Union, overload

import numpy as np
import numpy.typing as npt
from scipy import integrate, special

from .const import (
    DENSITY_FLOOR,
    LOG2_E,
    NON_CONVERGENCE_ADVICE,
    TWO_PI_E,
    WINDOW_SIGMAS,
)
from .exc import DomainError, NonConvergenceError
from .models import QuadratureConfig

_LOGGER = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_WEIGHT_SUM_TOL = 1e-12

FloatArray = npt.NDArray[np.float64]
ArrayOrFloat = Union[float, FloatArray]


def std_normal_pdf(x: float) -> float:
    """Return phi(x) = exp(-x^2 / 2) / sqrt(2 pi)."""
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def gaussian_entropy_bits(variance: float) -> float:
    """Return 1/2 log2(2 pi e v)."""
    return 0.5 * math.log2(TWO_PI_E * variance)


class MixtureComponent(NamedTuple):
    """One weighted Gaussian component."""

    weight: float
    mean: float
    variance: float


@dataclass(frozen=True)
class GaussianMixture1D:
    """A weighted list of one-dimensional Gaussian components."""

    components: tuple[MixtureComponent, ...]

    def __post_init__(self) -> None:
        """Validate the mixture."""
        if not self.components:
            raise DomainError("A mixture needs at least one component")
        total = 0.0
        for weight, mean, variance in self.components:
            if not (weight >= 0 and math.isfinite(weight)):
                raise DomainError(f"Invalid mixture weight {weight}")
            if not math.isfinite(mean):
                raise DomainError(f"Invalid mixture mean {mean}")
            if not (variance > 0 and math.isfinite(variance)):
                raise DomainError(f"Mixture variances must be positive, got {variance}")
            total += weight
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(f"Mixture weights sum to {total}, not 1")

    @classmethod
    def from_components(
        cls, components: Iterable[tuple[float, float, float]]
    ) -> GaussianMixture1D:
        """Build a mixture from (weight, mean, variance) triples."""
        return cls(tuple(MixtureComponent(*map(float, c)) for c in components))

    @classmethod
    def single(cls, mean: float, variance: float) -> GaussianMixture1D:
        """Build a single Gaussian."""
        return cls((MixtureComponent(1.0, float(mean), float(variance)),))

    @classmethod
    def antipodal(
        cls, a: float, variance: float, weight_plus: float = 0.5
    ) -> GaussianMixture1D:
        """Build the mixture weight_plus*N(+a, v) + (1 - weight_plus)*N(-a, v)."""
        return cls(
            (
                MixtureComponent(float(weight_plus), float(a), float(variance)),
                MixtureComponent(1.0 - float(weight_plus), -float(a), float(variance)),
            )
        )

    @property
    def mean(self) -> float:
        """Return the mixture mean."""
        return sum(c.weight * c.mean for c in self.components)

    @property
    def variance(self) -> float:
        """Return the mixture variance."""
        second = sum(c.weight * (c.variance + c.mean**2) for c in self.components)
        return max(second - self.mean**2, 0.0)

    def window(self, sigmas: float = WINDOW_SIGMAS) -> tuple[float, float]:
        """Return an interval holding all means +/- sigmas standard deviations."""
        live = self.reduced().components
        lo = min(c.mean - sigmas * math.sqrt(c.variance) for c in live)
        hi = max(c.mean + sigmas * math.sqrt(c.variance) for c in live)
        return lo, hi

    def reduced(self) -> GaussianMixture1D:
        """Drop zero-weight components and merge coincident ones."""
        merged: dict[tuple[float, float], float] = {}
        for weight, mean, variance in self.components:
            if weight == 0:
                continue
            merged[(mean, variance)] = merged.get((mean, variance), 0.0) + weight
        if len(merged) == len(self.components):
            return self
        return GaussianMixture1D(
            tuple(MixtureComponent(w, m, v) for (m, v), w in merged.items())
        )


@overload
def mixture_pdf(m: GaussianMixture1D, y: float) -> float:
    ...


@overload
def mixture_pdf(m: GaussianMixture1D, y: FloatArray) -> FloatArray:
    ...


def mixture_pdf(m: GaussianMixture1D, y: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluate sum_i w_i / sqrt(v_i) * phi((y - mu_i) / sqrt(v_i))."""
    if isinstance(y, np.ndarray):
        return np.exp(mixture_logpdf(m, y))
    return sum(
        c.weight * std_normal_pdf((y - c.mean) / math.sqrt(c.variance))
        / math.sqrt(c.variance)
        for c in m.components
    )


def mixture_logpdf(m: GaussianMixture1D, y: FloatArray) -> FloatArray:
    """Evaluate the log-density on an array, stable far out in the tails."""
    live = m.reduced().components
    weights = np.array([c.weight for c in live])
    means = np.array([c.mean for c in live])
    variances = np.array([c.variance for c in live])
    y = np.asarray(y, dtype=np.float64)
    log_terms = (
        -0.5 * (y[..., None] - means) ** 2 / variances
        - 0.5 * np.log(variances)
        - _LOG_SQRT_2PI
    )
    return special.logsumexp(log_terms, b=weights, axis=-1)  # type: ignore[no-any-return]


def _scalar_logpdf(m: GaussianMixture1D) -> Callable[[float], float]:
    """Return a fast scalar log-density for use inside adaptive quadrature."""
    terms = [
        (math.log(c.weight) - 0.5 * math.log(c.variance) - _LOG_SQRT_2PI, c.mean, c.variance)
        for c in m.reduced().components
    ]

    def _logpdf(y: float) -> float:
        exponents = [lw - 0.5 * (y - mu) ** 2 / v for lw, mu, v in terms]
        top = max(exponents)
        return top + math.log(sum(math.exp(e - top) for e in exponents))

    return _logpdf


def mixture_entropy_bits(m: GaussianMixture1D, cfg: QuadratureConfig) -> float:
    """Return the differential entropy of a mixture in bits."""
    reduced = m.reduced()
    if len(reduced.components) == 1:
        return gaussian_entropy_bits(reduced.components[0].variance)
    logpdf = _scalar_logpdf(reduced)
    floor = math.log(DENSITY_FLOOR)

    def _neg_f_log_f(y: float) -> float:
        log_f = logpdf(y)
        if log_f < floor:
            return 0.0
        return -math.exp(log_f) * log_f

    lo, hi = reduced.window()
    points = sorted({c.mean for c in reduced.components})
    nats = integrate_1d(_neg_f_log_f, (lo, hi), cfg, points=points)
    return nats * LOG2_E


@dataclass(frozen=True)
class EntropyBracket:
    """Analytic lower and upper bounds on a mixture entropy, in bits."""

    lower_bits: float
    upper_bits: float

    def __post_init__(self) -> None:
        """Validate the bracket."""
        if self.lower_bits > self.upper_bits:
            raise DomainError("Entropy bracket is inverted")

    def contains(self, value: float, tol: float = 0.0) -> bool:
        """Return True if value lies inside the bracket up to tol."""
        return self.lower_bits - tol <= value <= self.upper_bits + tol


def entropy_bracket(m: GaussianMixture1D) -> EntropyBracket:
    """Bound the entropy by conditioning (below) and by mixing (above)."""
    reduced = m.reduced()
    lower = sum(c.weight * gaussian_entropy_bits(c.variance) for c in reduced.components)
    weights = np.array([c.weight for c in reduced.components])
    mixing = float(np.sum(special.entr(weights))) * LOG2_E
    return EntropyBracket(lower_bits=lower, upper_bits=lower + mixing)


def binary_entropy_bits(gamma: float) -> float:
    """Return H2(gamma) in bits, with 0 log 0 = 0."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    return float(special.entr(gamma) + special.entr(1.0 - gamma)) * LOG2_E


def integrate_1d(
    f: Callable[[float], float],
    domain: tuple[float, float],
    cfg: QuadratureConfig,
    points: Sequence[float] | None = None,
) -> float:
    """Integrate f over a finite or infinite interval by adaptive bisection.

    QUADPACK bisects the worst panel with a fixed 21-point Gauss-Kronrod rule
    until the error estimate meets the tolerances. Running out of panels
    raises NonConvergenceError.
    """
    lo, hi = domain
    kwargs: dict[str, Any] = {
        "epsabs": cfg.abs_tol,
        "epsrel": cfg.rel_tol,
        "limit": cfg.max_subdivisions,
        "full_output": 1,
    }
    if points and math.isfinite(lo) and math.isfinite(hi):
        inner = [p for p in points if lo < p < hi]
        if inner:
            kwargs["points"] = inner
    value, abserr, info, *message = integrate.quad(f, lo, hi, **kwargs)
    if message:
        if info.get("last", 0) >= cfg.max_subdivisions:
            raise NonConvergenceError(
                f"integrate_1d on [{lo}, {hi}]: subdivision limit "
                f"{cfg.max_subdivisions} reached (error estimate {abserr:.3g}): "
                f"{NON_CONVERGENCE_ADVICE}"
            )
        _LOGGER.debug(
            "integrate_1d on [%s, %s]: %s (error estimate %s)",
            lo,
            hi,
            message[0],
            abserr,
        )
    return float(value)


@lru_cache(maxsize=16)
def _hermite_rule(n: int) -> tuple[FloatArray, FloatArray]:
    """Return Hermite nodes z and weights w * exp(z^2) for plain integrals.

    Outer weights underflow for large n; those nodes are dropped.
    """
    z, w = special.roots_hermite(n)
    keep = w > 0
    z = z[keep]
    scaled = np.exp(np.log(w[keep]) + z * z)
    z.setflags(write=False)
    scaled.setflags(write=False)
    return z, scaled


def _axis_rule(hint: GaussianMixture1D, n: int) -> tuple[FloatArray, FloatArray]:
    """Map the Hermite rule onto the centre and scale of a hint mixture."""
    z, scaled = _hermite_rule(n)
    scale = math.sqrt(2.0 * hint.variance)
    return hint.mean + scale * z, scale * scaled


def integrate_2d(
    f: Callable[[FloatArray, FloatArray], FloatArray],
    weight_hint: tuple[GaussianMixture1D, GaussianMixture1D],
    cfg: QuadratureConfig,
) -> float:
    """Integrate f over the plane with a tensor-product Gauss-Hermite rule.

    Each axis is shifted and scaled to its hint's mean and standard deviation.
    The node count doubles until two successive results agree to rel_tol
    (or abs_tol); f is called with two broadcastable coordinate grids.
    """
    n = cfg.hermite_nodes
    previous: float | None = None
    for _ in range(cfg.max_doublings + 1):
        x, wx = _axis_rule(weight_hint[0], n)
        y, wy = _axis_rule(weight_hint[1], n)
        values = np.broadcast_to(f(x[:, None], y[None, :]), (x.size, y.size))
        current = float(wx @ values @ wy)
        if previous is not None and abs(current - previous) <= max(
            cfg.rel_tol * abs(current), cfg.abs_tol
        ):
            return current
        previous = current
        n *= 2
    raise NonConvergenceError(
        f"integrate_2d: no agreement to rel_tol={cfg.rel_tol} after "
        f"{cfg.max_doublings} doublings (last value {previous}): "
        f"{NON_CONVERGENCE_ADVICE}"
    )
