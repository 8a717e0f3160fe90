"""Seeded Monte-Carlo simulation of the control systems.

Batches draw from independent PCG64 streams spawned from one SeedSequence,
so results depend only on (seed, samples, batch), not on thread scheduling.
Normals come from NumPy's ziggurat ``standard_normal``.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from functools import partial

import numpy as np

from .const import LOG2_E
from .core_math import FloatArray, GaussianMixture1D, mixture_logpdf
from .exc import DomainError
from .models import MonteCarloConfig, ProblemParams
from .non_zec import posterior_mean

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class McEstimate:
    """A sample mean with its standard error."""

    mean: float
    std_error: float

    def within(self, value: float, bands: float) -> bool:
        """Return True if value lies within bands standard errors."""
        return abs(self.mean - value) <= bands * self.std_error


@dataclass(frozen=True)
class SampleRecord:
    """One array per random variable of the closed loop, aligned by draw."""

    x0: FloatArray
    w1: FloatArray
    s: FloatArray
    w2: FloatArray
    u1: FloatArray
    x1: FloatArray
    z1: FloatArray
    y1: FloatArray
    u2: FloatArray

    @classmethod
    def concatenate(cls, records: list[SampleRecord]) -> SampleRecord:
        """Join batches in order."""
        return cls(
            **{
                f.name: np.concatenate([getattr(r, f.name) for r in records])
                for f in fields(cls)
            }
        )

    @property
    def size(self) -> int:
        """Return the number of draws."""
        return int(self.x0.size)


@dataclass(frozen=True)
class _Moments:
    """Count, mean and sum of squared deviations of one statistic."""

    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: FloatArray) -> _Moments:
        mean = float(np.mean(values))
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def combine(self, other: _Moments) -> _Moments:
        """Merge two partial moments (Chan et al. pairwise update)."""
        n = self.n + other.n
        delta = other.mean - self.mean
        return _Moments(
            n,
            self.mean + delta * other.n / n,
            self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        )

    def estimate(self) -> McEstimate:
        if self.n < 2:
            return McEstimate(self.mean, math.inf)
        return McEstimate(self.mean, math.sqrt(self.m2 / (self.n - 1) / self.n))


def _batch_sizes(mc: MonteCarloConfig) -> list[int]:
    full, rest = divmod(mc.samples, mc.batch)
    return [mc.batch] * full + ([rest] if rest else [])


def _generators(mc: MonteCarloConfig) -> list[tuple[np.random.Generator, int]]:
    sizes = _batch_sizes(mc)
    children = np.random.SeedSequence(mc.seed).spawn(len(sizes))
    return [
        (np.random.Generator(np.random.PCG64(child)), size)
        for child, size in zip(children, sizes)
    ]


def _draw(
    rng: np.random.Generator,
    size: int,
    a: float,
    gamma: float,
    V1: float,
    p: ProblemParams,
    two_point: bool,
) -> SampleRecord:
    x0 = math.sqrt(p.Q) * rng.standard_normal(size)
    w1 = math.sqrt(V1) * rng.standard_normal(size) if V1 > 0 else np.zeros(size)
    z1 = math.sqrt(p.N) * rng.standard_normal(size)
    s = np.where(x0 >= 0, 1.0, -1.0)
    u1 = w1 + a * s - x0
    x1 = x0 + u1
    y1 = x1 + z1
    if two_point:
        w2 = a * s
        u2 = a * np.tanh(a * y1 / p.N)
    else:
        flips = rng.random(size) < gamma
        w2_sign = np.where(flips, -s, s)
        w2 = a * w2_sign
        u2 = posterior_mean(w1, w2_sign, y1, a, gamma, p.N)
    return SampleRecord(x0=x0, w1=w1, s=s, w2=w2, u1=u1, x1=x1, z1=z1, y1=y1, u2=u2)


def _records(
    a: float,
    gamma: float,
    V1: float,
    p: ProblemParams,
    mc: MonteCarloConfig,
    two_point: bool,
) -> Iterator[Callable[[], SampleRecord]]:
    for rng, size in _generators(mc):
        yield partial(_draw, rng, size, a, gamma, V1, p, two_point)


def _reduce(
    jobs: Iterator[Callable[[], SampleRecord]],
    stats: Callable[[SampleRecord], tuple[FloatArray, ...]],
    mc: MonteCarloConfig,
) -> tuple[McEstimate, ...]:
    """Run batches on a thread pool and merge their moments in batch order."""

    def _run(job: Callable[[], SampleRecord]) -> tuple[_Moments, ...]:
        return tuple(_Moments.of(values) for values in stats(job()))

    with ThreadPoolExecutor(max_workers=mc.threads) as executor:
        partials = list(executor.map(_run, jobs))
    merged = partials[0]
    for chunk in partials[1:]:
        merged = tuple(m.combine(o) for m, o in zip(merged, chunk))
    return tuple(m.estimate() for m in merged)


def _check_design(a: float, gamma: float, V1: float) -> None:
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    if V1 < 0:
        raise DomainError(f"V1 must be nonnegative, got {V1}")


def _costs(record: SampleRecord) -> tuple[FloatArray, FloatArray]:
    return record.u1 * record.u1, (record.x1 - record.u2) ** 2


def sample_two_point(a: float, p: ProblemParams, mc: MonteCarloConfig) -> SampleRecord:
    """Return every draw of the two-point system."""
    _check_design(a, 0.0, 0.0)
    return SampleRecord.concatenate([job() for job in _records(a, 0.0, 0.0, p, mc, True)])


def sample_non_zec(
    a: float, gamma: float, V1: float, p: ProblemParams, mc: MonteCarloConfig
) -> SampleRecord:
    """Return every draw of the Non-ZEC system."""
    _check_design(a, gamma, V1)
    return SampleRecord.concatenate(
        [job() for job in _records(a, gamma, V1, p, mc, False)]
    )


def simulate_two_point(
    a: float, p: ProblemParams, mc: MonteCarloConfig
) -> tuple[McEstimate, McEstimate]:
    """Estimate (E[U1^2], E[(X1 - a tanh(a Y1 / N))^2])."""
    _check_design(a, 0.0, 0.0)
    power, cost = _reduce(_records(a, 0.0, 0.0, p, mc, True), _costs, mc)
    _LOGGER.debug("two-point a=%s: P=%s, S=%s", a, power, cost)
    return power, cost


def simulate_non_zec(
    a: float, gamma: float, V1: float, p: ProblemParams, mc: MonteCarloConfig
) -> tuple[McEstimate, McEstimate]:
    """Estimate (E[U1^2], E[(X1 - U2)^2]) with U2 the posterior mean."""
    _check_design(a, gamma, V1)
    power, cost = _reduce(_records(a, gamma, V1, p, mc, False), _costs, mc)
    _LOGGER.debug(
        "Non-ZEC a=%s, gamma=%s, V1=%s: P=%s, S=%s", a, gamma, V1, power, cost
    )
    return power, cost


def cross_term(
    a: float, gamma: float, V1: float, p: ProblemParams, mc: MonteCarloConfig
) -> McEstimate:
    """Estimate E[W1 (U2 - W1)], which vanishes for every design."""
    _check_design(a, gamma, V1)
    (estimate,) = _reduce(
        _records(a, gamma, V1, p, mc, False),
        lambda r: (r.w1 * (r.u2 - r.w1),),
        mc,
    )
    return estimate


def mc_entropy_bits(m: GaussianMixture1D, mc: MonteCarloConfig) -> McEstimate:
    """Estimate h(m) in bits as the sample mean of -log2 f(Y)."""
    weights = np.array([c.weight for c in m.components])
    means = np.array([c.mean for c in m.components])
    sds = np.sqrt([c.variance for c in m.components])

    def _batch(job: tuple[np.random.Generator, int]) -> tuple[_Moments]:
        rng, size = job
        index = rng.choice(weights.size, size=size, p=weights)
        y = means[index] + sds[index] * rng.standard_normal(size)
        return (_Moments.of(-mixture_logpdf(m, y) * LOG2_E),)

    with ThreadPoolExecutor(max_workers=mc.threads) as executor:
        partials = list(executor.map(_batch, _generators(mc)))
    merged = partials[0][0]
    for (chunk,) in partials[1:]:
        merged = merged.combine(chunk)
    return merged.estimate()
