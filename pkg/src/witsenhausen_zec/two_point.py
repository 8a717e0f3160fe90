"""Witsenhausen's two-point strategy U1 = a*sign(X0) - X0."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .const import WINDOW_SIGMAS
from .core_math import ArrayOrFloat, integrate_1d, std_normal_pdf
from .exc import DomainError
from .models import CostResult, Infeasible, ProblemParams, QuadratureConfig

_LOGGER = logging.getLogger(__name__)

# Roots this close below zero are rounding noise of the a=0 root at P=Q
_ROOT_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class TwoPointEval:
    """A signal level with its power and estimation costs."""

    a: float
    P: float
    S: float


def p2_min(p: ProblemParams) -> tuple[float, float]:
    """Return (Q(1 - 2/pi), sqrt(2Q/pi)): the least two-point power and its a."""
    return p.Q * (1.0 - 2.0 / math.pi), p.sign_gain


def power_cost(a: float, p: ProblemParams) -> float:
    """Return P2(a) = Q + a(a - 2 sqrt(2Q/pi))."""
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    return p.Q + a * (a - 2.0 * p.sign_gain)


def _sech(x: float) -> float:
    e = math.exp(-abs(x))
    return 2.0 * e / (1.0 + e * e)


def estimation_cost(a: float, p: ProblemParams, cfg: QuadratureConfig) -> float:
    """Return S2(a), the MMSE of X1 = a*sign(X0) observed through N-noise.

    S2(a) = a^2 sqrt(2 pi / N) phi(a / sqrt(N)) * int phi(y / sqrt(N)) / cosh(a y / N) dy
    """
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    if a == 0:
        return 0.0
    sd = math.sqrt(p.N)
    half_width = WINDOW_SIGMAS * sd
    integral = integrate_1d(
        lambda y: std_normal_pdf(y / sd) * _sech(a * y / p.N),
        (-half_width, half_width),
        cfg,
        points=[0.0],
    )
    value = a * a * math.exp(-0.5 * a * a / p.N) / sd * integral
    return min(max(value, 0.0), a * a)


def receiver(y1: ArrayOrFloat, a: float, p: ProblemParams) -> ArrayOrFloat:
    """Return E[X1 | Y1 = y1] = a tanh(a y1 / N)."""
    if isinstance(y1, np.ndarray):
        return a * np.tanh(a * y1 / p.N)
    return a * math.tanh(a * y1 / p.N)


def roots_for_power(P: float, p: ProblemParams) -> list[float]:
    """Return the nonnegative a with P2(a) = P, in increasing order.

    Empty below P2_min; a single root at P2_min; the lower root drops out
    once P > Q because it turns negative.
    """
    vertex = p.sign_gain
    discriminant = vertex * vertex - p.Q + P
    if discriminant < -_ROOT_ZERO_TOL * p.Q:
        return []
    if discriminant <= _ROOT_ZERO_TOL * p.Q:
        return [vertex]
    spread = math.sqrt(discriminant)
    roots = []
    lower = vertex - spread
    if lower < 0 and lower > -_ROOT_ZERO_TOL * max(1.0, vertex):
        lower = 0.0
    if lower >= 0:
        roots.append(lower)
    roots.append(vertex + spread)
    return roots


def s2_branches(P: float, p: ProblemParams, cfg: QuadratureConfig) -> list[TwoPointEval]:
    """Return the (a, P, S) evaluation of every root of P2(a) = P."""
    return [
        TwoPointEval(a=a, P=P, S=estimation_cost(a, p, cfg))
        for a in roots_for_power(P, p)
    ]


def s2_of_p(P: float, p: ProblemParams, cfg: QuadratureConfig) -> CostResult:
    """Return S2(P), the better of the two branches, or Infeasible below P2_min."""
    if not (branches := s2_branches(P, p, cfg)):
        return Infeasible(f"P={P} is below P2_min={p2_min(p)[0]}")
    best = min(branches, key=lambda e: e.S)
    _LOGGER.debug("P=%s: two-point branches %s, best a=%s", P, branches, best.a)
    return best.S
