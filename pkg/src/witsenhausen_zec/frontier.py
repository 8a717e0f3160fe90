"""Sweeps over P and N, the time-sharing envelope and curve CSV files."""
from __future__ import annotations

import asyncio
import csv
import json
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, TextIO, TypeVar, Union

import async_timeout
import numpy as np

from .const import (
    CSV_FORMAT,
    DEFAULT_TOL_P,
    DEFAULT_ZEC_GRID,
    ENVELOPE_TOL,
    SWEEP_SAFETY_TIMEOUT,
)
from .core_math import FloatArray
from .exc import (
    CurveParseError,
    DegenerateInputError,
    DomainError,
    EmptyCurveFileError,
    MonotonicityError,
    NonConvergenceError,
    NoUpperBoundError,
    SweepTimeoutError,
)
from .models import (
    CostResult,
    Infeasible,
    ProblemParams,
    QuadratureConfig,
    SearchConfig,
    is_feasible,
)
from .non_zec import NonZecDesign, s_nonzec
from .retry import retry_on_nonconvergence
from .two_point import s2_of_p
from .zec import p_star, s_zec

_LOGGER = logging.getLogger(__name__)

_T = TypeVar("_T")

Scheme = Literal["two_point", "zec", "non_zec"]
SCHEMES: tuple[Scheme, ...] = ("two_point", "zec", "non_zec")

Point = tuple[float, float]
PathLike = Union[str, Path]


@dataclass(frozen=True)
class Curve:
    """Points (x, y) with strictly increasing, finite x."""

    label: str
    points: tuple[Point, ...]
    meta: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)
    x_label: str = "P"
    y_label: str = "S"

    def __post_init__(self) -> None:
        """Validate the curve."""
        for x, y in self.points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise DomainError(f"Curve {self.label!r} has a non-finite point ({x}, {y})")
        for (x0, _), (x1, _) in zip(self.points, self.points[1:]):
            if not x1 > x0:
                raise DomainError(
                    f"Curve {self.label!r} x values must increase: {x0} then {x1}"
                )

    @property
    def xs(self) -> FloatArray:
        return np.array([x for x, _ in self.points])

    @property
    def ys(self) -> FloatArray:
        return np.array([y for _, y in self.points])

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Envelope:
    """The lower convex hull of a set of curves with per-vertex provenance."""

    input_curves: tuple[Curve, ...]
    hull_points: tuple[Point, ...]
    supporting: tuple[tuple[str, int], ...]

    def evaluate(self, x: float) -> float:
        """Interpolate linearly between hull vertices."""
        xs = np.array([hx for hx, _ in self.hull_points])
        ys = np.array([hy for _, hy in self.hull_points])
        if not xs[0] - ENVELOPE_TOL <= x <= xs[-1] + ENVELOPE_TOL:
            raise DomainError(f"x={x} is outside the envelope range [{xs[0]}, {xs[-1]}]")
        return float(np.interp(x, xs, ys))

    def as_curve(self, label: str = "time_sharing") -> Curve:
        """Return the hull vertices as a curve."""
        first = self.input_curves[0]
        return Curve(
            label=label,
            points=self.hull_points,
            meta={"inputs": [c.label for c in self.input_curves]},
            x_label=first.x_label,
            y_label=first.y_label,
        )

    def provenance(self) -> list[dict[str, Any]]:
        """Return which input point supports each hull vertex."""
        return [
            {"x": x, "y": y, "curve": label, "index": index}
            for (x, y), (label, index) in zip(self.hull_points, self.supporting)
        ]


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_convex_envelope(curves: Sequence[Curve]) -> Envelope:
    """Build the lower convex hull of the union of all curve points.

    Andrew's monotone chain over the points sorted by x, keeping only
    counter-clockwise turns. Collinear points stay on the hull
    and equal x keeps the lowest y.
    """
    if not curves:
        raise DegenerateInputError("lower_convex_envelope needs at least one curve")
    lowest: dict[float, tuple[float, str, int]] = {}
    for curve in curves:
        for index, (x, y) in enumerate(curve.points):
            if x not in lowest or y < lowest[x][0]:
                lowest[x] = (y, curve.label, index)
    if len(lowest) < 2:
        raise DegenerateInputError(
            f"lower_convex_envelope needs at least 2 distinct points, got {len(lowest)}"
        )

    hull: list[tuple[Point, tuple[str, int]]] = []
    for x in sorted(lowest):
        y, label, index = lowest[x]
        while len(hull) > 1 and _cross(hull[-2][0], hull[-1][0], (x, y)) < 0:
            hull.pop()
        hull.append(((x, y), (label, index)))

    if _LOGGER.isEnabledFor(logging.DEBUG):
        _LOGGER.debug(
            "Envelope of %s: %s of %s points on the hull",
            [c.label for c in curves],
            len(hull),
            len(lowest),
        )
    return Envelope(
        input_curves=tuple(curves),
        hull_points=tuple(point for point, _ in hull),
        supporting=tuple(source for _, source in hull),
    )


def format_value(value: float | int | str) -> str:
    """Format numbers with 17 significant digits."""
    if isinstance(value, str):
        return value
    return format(value, CSV_FORMAT)


def write_table(
    stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[float | int | str]]
) -> None:
    """Write a header line and rows as comma-separated, LF-terminated CSV."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def write_csv(curve: Curve, stream: TextIO) -> None:
    """Write a curve as two columns."""
    write_table(stream, (curve.x_label, curve.y_label), curve.points)


def write_provenance(envelope: Envelope, path: PathLike) -> None:
    """Write the hull provenance as sorted-key JSON."""
    Path(path).write_text(
        json.dumps(envelope.provenance(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _parse_row(row: list[str]) -> Point | None:
    """Return (x, y), or None if the row is not two numbers."""
    if len(row) != 2:
        return None
    try:
        return float(row[0]), float(row[1])
    except ValueError:
        return None


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_csv(path: PathLike) -> Curve:
    """Read a two-column curve file.

    A first line with no numeric cell is taken as a header. Rows are sorted
    by x and duplicate x values keep the lowest y.
    """
    path = Path(path)
    lowest: dict[float, float] = {}
    seen_row = False
    with path.open(newline="", encoding="utf-8") as stream:
        for line_number, row in enumerate(csv.reader(stream), start=1):
            cells = [cell.strip() for cell in row]
            if not any(cells):
                continue
            point = _parse_row(cells)
            if point is None:
                if not seen_row and not any(map(_is_number, cells)):
                    seen_row = True
                    continue
                raise CurveParseError(
                    str(path), line_number, f"expected two numbers, got {row!r}"
                )
            seen_row = True
            x, y = point
            if not (math.isfinite(x) and math.isfinite(y)):
                raise CurveParseError(str(path), line_number, "non-finite value")
            lowest[x] = min(y, lowest.get(x, y))
    if not lowest:
        raise EmptyCurveFileError(f"{path}: no data rows")
    _LOGGER.debug("Read %s points from %s", len(lowest), path)
    return Curve(
        label=path.stem,
        points=tuple((x, lowest[x]) for x in sorted(lowest)),
        meta={"source": str(path)},
    )


def _check_increasing(grid: Sequence[float], name: str) -> None:
    if not grid:
        raise DomainError(f"{name} must not be empty")
    for lo, hi in zip(grid, grid[1:]):
        if not hi > lo:
            raise DomainError(f"{name} must be strictly increasing: {lo} then {hi}")


async def async_map_grid(
    func: Callable[[float], _T],
    grid: Sequence[float],
    threads: int = 1,
    timeout: float = SWEEP_SAFETY_TIMEOUT,
) -> list[_T]:
    """Evaluate func at every grid value on a bounded thread pool.

    Results come back in grid order. Only NumPy work releases the GIL, so
    sweeps dominated by scalar quadrature callbacks do not speed up.
    """
    loop = asyncio.get_running_loop()
    executor = ThreadPoolExecutor(max_workers=threads)
    try:
        async with async_timeout.timeout(timeout):
            return list(
                await asyncio.gather(
                    *(loop.run_in_executor(executor, func, x) for x in grid)
                )
            )
    except asyncio.TimeoutError as ex:
        raise SweepTimeoutError(
            f"Sweep over {len(grid)} points did not finish within {timeout} s"
        ) from ex
    finally:
        executor.shutdown(wait=False, cancel_futures=True)


@retry_on_nonconvergence()
def _scheme_cost(
    scheme: Scheme,
    P: float,
    p: ProblemParams,
    search: SearchConfig | None,
    *,
    cfg: QuadratureConfig,
) -> CostResult:
    if scheme == "two_point":
        return s2_of_p(P, p, cfg)
    if scheme == "zec":
        return s_zec(P, p, cfg)
    result = s_nonzec(P, p, cfg, search)
    return result if isinstance(result, Infeasible) else result[0]


def _annotated(name: str, value: float, call: Callable[[], _T]) -> _T:
    try:
        return call()
    except NonConvergenceError as ex:
        raise NonConvergenceError(f"{name}={value}: {ex}") from ex


async def async_sweep_s_vs_p(
    scheme: Scheme,
    P_grid: Sequence[float],
    p: ProblemParams,
    cfg: QuadratureConfig,
    search: SearchConfig | None = None,
    threads: int = 1,
    timeout: float = SWEEP_SAFETY_TIMEOUT,
) -> Curve:
    """Evaluate S(P) of one scheme along P_grid; infeasible points are gaps."""
    if scheme not in SCHEMES:
        raise DomainError(f"Unknown scheme {scheme!r}, expected one of {SCHEMES}")
    _check_increasing(P_grid, "P_grid")

    def _point(P: float) -> CostResult:
        return _annotated("P", P, lambda: _scheme_cost(scheme, P, p, search, cfg=cfg))

    results = await async_map_grid(_point, P_grid, threads, timeout)
    points = tuple(
        (float(P), float(value))  # type: ignore[arg-type]
        for P, value in zip(P_grid, results)
        if is_feasible(value)
    )
    _LOGGER.debug(
        "%s sweep: %s of %s points feasible", scheme, len(points), len(P_grid)
    )
    return Curve(
        label=scheme,
        points=points,
        meta={"scheme": scheme, "Q": p.Q, "N": p.N, "rel_tol": cfg.rel_tol},
    )


def sweep_s_vs_p(
    scheme: Scheme,
    P_grid: Sequence[float],
    p: ProblemParams,
    cfg: QuadratureConfig,
    search: SearchConfig | None = None,
    threads: int = 1,
) -> Curve:
    """Run async_sweep_s_vs_p to completion."""
    return asyncio.run(async_sweep_s_vs_p(scheme, P_grid, p, cfg, search, threads))


@retry_on_nonconvergence()
def _nonzec_point(
    P: float, p: ProblemParams, search: SearchConfig | None, *, cfg: QuadratureConfig
) -> tuple[float, NonZecDesign] | Infeasible:
    return s_nonzec(P, p, cfg, search)


def sweep_nonzec_argmin(
    P_grid: Sequence[float],
    p: ProblemParams,
    cfg: QuadratureConfig,
    search: SearchConfig | None = None,
    threads: int = 1,
) -> list[tuple[float, float, float, float]]:
    """Return (P, S_NonZEC, a*, gamma*) rows for every feasible P."""
    _check_increasing(P_grid, "P_grid")

    def _point(P: float) -> tuple[float, NonZecDesign] | Infeasible:
        return _annotated("P", P, lambda: _nonzec_point(P, p, search, cfg=cfg))

    results = asyncio.run(async_map_grid(_point, P_grid, threads))
    return [
        (float(P), result[0], result[1].a, result[1].gamma)
        for P, result in zip(P_grid, results)
        if not isinstance(result, Infeasible)
    ]


@retry_on_nonconvergence()
def _pstar_point(
    N: float, Q: float, tol_P: float, grid: int, *, cfg: QuadratureConfig
) -> float:
    return p_star(ProblemParams(Q=Q, N=N), cfg, tol_P, grid)


async def async_sweep_pstar_vs_n(
    N_grid: Sequence[float],
    Q: float,
    cfg: QuadratureConfig,
    tol_P: float = DEFAULT_TOL_P,
    grid: int = DEFAULT_ZEC_GRID,
    threads: int = 1,
    timeout: float = SWEEP_SAFETY_TIMEOUT,
) -> Curve:
    """Compute P* for every N; the result must not decrease with N."""
    _check_increasing(N_grid, "N_grid")
    if any(N <= 0 for N in N_grid):
        raise DomainError("N_grid must be positive")

    def _point(N: float) -> float:
        try:
            return _annotated("N", N, lambda: _pstar_point(N, Q, tol_P, grid, cfg=cfg))
        except NoUpperBoundError:
            _LOGGER.warning("N=%s: no feasible power up to the search cap", N)
            raise

    values = await async_map_grid(_point, N_grid, threads, timeout)
    for (n0, p0), (n1, p1) in zip(zip(N_grid, values), zip(N_grid[1:], values[1:])):
        if p1 < p0 - tol_P:
            raise MonotonicityError(
                f"P* decreased from {p0} at N={n0} to {p1} at N={n1}"
            )
    return Curve(
        label="p_star",
        points=tuple((float(N), value) for N, value in zip(N_grid, values)),
        meta={"Q": Q, "tol_P": tol_P, "grid": grid},
        x_label="N",
        y_label="P_star",
    )


def sweep_pstar_vs_n(
    N_grid: Sequence[float],
    Q: float,
    cfg: QuadratureConfig,
    tol_P: float = DEFAULT_TOL_P,
    grid: int = DEFAULT_ZEC_GRID,
    threads: int = 1,
) -> Curve:
    """Run async_sweep_pstar_vs_n to completion."""
    return asyncio.run(async_sweep_pstar_vs_n(N_grid, Q, cfg, tol_P, grid, threads))
