"""Command-line front end.

Every computing command writes CSV (to --out or stdout) and, with --out, a
sibling ``<out>.manifest.json`` recording the exact parameters. Settings
resolve as built-in defaults, then the --config JSON file, then flags.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, NamedTuple, TextIO

import numpy as np

from . import __version__
from .const import (
    DEFAULT_A_GRID,
    DEFAULT_ABS_TOL,
    DEFAULT_BANDS,
    DEFAULT_GAMMA_GRID,
    DEFAULT_HERMITE_NODES,
    DEFAULT_MAX_DOUBLINGS,
    DEFAULT_MAX_SUBDIVISIONS,
    DEFAULT_MC_BATCH,
    DEFAULT_MC_ENTROPY_SAMPLES,
    DEFAULT_MC_SAMPLES,
    DEFAULT_MC_SEED,
    DEFAULT_REFINE_TOL,
    DEFAULT_REGION_GAMMAS,
    DEFAULT_REL_TOL,
    DEFAULT_TOL_P,
    DEFAULT_ZEC_GRID,
    GAMMA_MAX,
    THREADS_ENV,
)
from .core_math import GaussianMixture1D, mixture_entropy_bits
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
from .frontier import (
    format_value,
    ingest_csv,
    lower_convex_envelope,
    sweep_nonzec_argmin,
    sweep_pstar_vs_n,
    sweep_s_vs_p,
    write_provenance,
    write_table,
)
from .mc_oracle import McEstimate, mc_entropy_bits, simulate_non_zec, simulate_two_point
from .models import MonteCarloConfig, ProblemParams, QuadratureConfig, SearchConfig
from .non_zec import cost_F, cost_region, info_terms
from .two_point import estimation_cost, power_cost
from .zec import p_star_search

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

USAGE_ERRORS = (DomainError, CurveParseError, EmptyCurveFileError, DegenerateInputError)
NUMERICAL_ERRORS = (
    NonConvergenceError,
    NoUpperBoundError,
    MonotonicityError,
    SweepTimeoutError,
)

# Absolute slack on verify bands so exactly-zero estimates compare cleanly
VERIFY_ABS_TOL = 1e-12

SETTING_DEFAULTS: dict[str, Any] = {
    "rel_tol": DEFAULT_REL_TOL,
    "abs_tol": DEFAULT_ABS_TOL,
    "max_subdivisions": DEFAULT_MAX_SUBDIVISIONS,
    "hermite_nodes": DEFAULT_HERMITE_NODES,
    "max_doublings": DEFAULT_MAX_DOUBLINGS,
    "gamma_points": DEFAULT_GAMMA_GRID,
    "a_points": DEFAULT_A_GRID,
    "refine_tol": DEFAULT_REFINE_TOL,
    "zec_grid": DEFAULT_ZEC_GRID,
    "tol_p": DEFAULT_TOL_P,
    "samples": DEFAULT_MC_SAMPLES,
    "entropy_samples": DEFAULT_MC_ENTROPY_SAMPLES,
    "seed": DEFAULT_MC_SEED,
    "batch": DEFAULT_MC_BATCH,
    "bands": DEFAULT_BANDS,
    "threads": None,
    "Q": None,
    "N": None,
}


class Table(NamedTuple):
    header: Sequence[str]
    rows: list[Sequence[float | int | str]]


@dataclass(frozen=True)
class RunSettings:
    """Resolved settings of one invocation."""

    quadrature: QuadratureConfig
    search: SearchConfig
    monte_carlo: MonteCarloConfig
    entropy_samples: int
    zec_grid: int
    tol_p: float
    bands: float
    threads: int


def parse_grid(text: str) -> list[float]:
    """Parse ``start:end:count`` into count evenly spaced values, endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not start:end:count")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f"grid {text!r}: {ex}") from ex
    if count < 2:
        raise argparse.ArgumentTypeError(f"grid {text!r} needs count >= 2")
    if not end > start:
        raise argparse.ArgumentTypeError(f"grid {text!r} needs end > start")
    return [float(v) for v in np.linspace(start, end, count)]


def parse_values(text: str) -> list[float]:
    """Parse a grid or a comma-separated list of values."""
    if ":" in text:
        return parse_grid(text)
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f"values {text!r}: {ex}") from ex


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="CSV output file (default: stdout)")
    common.add_argument("--config", type=Path, help="JSON file of setting overrides")
    common.add_argument(
        "--threads",
        type=int,
        help=(
            f"worker threads (default: ${THREADS_ENV} or CPU count); quadrature "
            "callbacks hold the GIL, so sweeps gain little beyond one thread"
        ),
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="log progress to stderr"
    )
    group = common.add_argument_group("quadrature")
    group.add_argument("--rel-tol", dest="rel_tol", type=float)
    group.add_argument("--abs-tol", dest="abs_tol", type=float)
    group.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)
    group.add_argument("--hermite-nodes", dest="hermite_nodes", type=int)
    group.add_argument("--max-doublings", dest="max_doublings", type=int)
    return common


def _add_problem(parser: argparse.ArgumentParser, need_n: bool = True) -> None:
    parser.add_argument("--Q", type=float, help="source variance")
    if need_n:
        parser.add_argument("--N", type=float, help="channel noise variance")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser for all subcommands."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="witsenhausen-zec",
        description="Power / estimation cost trade-offs of ZEC and Non-ZEC schemes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    two_point = commands.add_parser(
        "two-point", parents=[common], help="two-point strategy costs"
    )
    _add_problem(two_point)
    grid = two_point.add_mutually_exclusive_group()
    grid.add_argument("--a-grid", type=parse_grid, help="start:end:count of a")
    grid.add_argument("--p-grid", type=parse_grid, help="start:end:count of P")
    grid.add_argument("--a", type=float, help="a single signal level")

    pstar = commands.add_parser("pstar", parents=[common], help="ZEC power threshold P*")
    _add_problem(pstar, need_n=False)
    noise = pstar.add_mutually_exclusive_group()
    noise.add_argument("--N", type=float, help="channel noise variance")
    noise.add_argument("--n-grid", type=parse_grid, help="start:end:count of N")
    pstar.add_argument("--tol", dest="tol_p", type=float, help="bisection tolerance on P")
    pstar.add_argument("--grid", dest="zec_grid", type=int, help="a-grid size per P")

    nonzec = commands.add_parser("nonzec", parents=[common], help="Non-ZEC costs")
    _add_problem(nonzec)
    nonzec.add_argument("--p-grid", type=parse_grid, help="start:end:count of P")
    nonzec.add_argument(
        "--gamma-grid",
        type=parse_values,
        help="crossover values: start:end:count or a comma list",
    )
    nonzec.add_argument("--mode", choices=("min", "region"), default="min")
    nonzec.add_argument("--a-points", dest="a_points", type=int)
    nonzec.add_argument("--gamma-points", dest="gamma_points", type=int)
    nonzec.add_argument("--refine-tol", dest="refine_tol", type=float)

    envelope = commands.add_parser(
        "envelope", parents=[common], help="lower convex envelope of curve files"
    )
    envelope.add_argument("inputs", nargs="+", type=Path, help="two-column CSV files")

    verify = commands.add_parser(
        "verify", parents=[common], help="check analytic values against Monte-Carlo"
    )
    _add_problem(verify)
    verify.add_argument("--a", type=float, required=True)
    verify.add_argument("--gamma", type=float, help="Non-ZEC crossover (default: two-point)")
    verify.add_argument("--V1", type=float, default=0.0)
    verify.add_argument("--samples", type=int)
    verify.add_argument("--entropy-samples", dest="entropy_samples", type=int)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--batch", type=int)
    verify.add_argument("--bands", type=float, help="standard errors allowed")

    replay = commands.add_parser(
        "replay", help="re-run a manifest and compare its CSV byte for byte"
    )
    replay.add_argument("manifest", type=Path)
    replay.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def load_config_file(path: Path | None) -> dict[str, Any]:
    """Load a flat JSON object of setting overrides."""
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as ex:
        raise DomainError(f"Cannot read config {path}: {ex}") from ex
    if not isinstance(data, dict):
        raise DomainError(f"Config {path} must hold a JSON object")
    if unknown := sorted(set(data) - set(SETTING_DEFAULTS)):
        raise DomainError(f"Config {path} has unknown keys {unknown}")
    return data


def _resolve(args: argparse.Namespace, file_config: dict[str, Any], key: str) -> Any:
    if (value := getattr(args, key, None)) is not None:
        return value
    if key in file_config:
        return file_config[key]
    return SETTING_DEFAULTS[key]


def default_threads() -> int:
    """Return the thread count from the environment or the CPU count."""
    if env := os.environ.get(THREADS_ENV):
        try:
            return max(int(env), 1)
        except ValueError as ex:
            raise DomainError(f"{THREADS_ENV}={env!r} is not an integer") from ex
    return os.cpu_count() or 1


def resolve_settings(args: argparse.Namespace, file_config: dict[str, Any]) -> RunSettings:
    """Layer defaults, the config file and flags."""

    def get(key: str) -> Any:
        return _resolve(args, file_config, key)

    threads = get("threads") or default_threads()
    return RunSettings(
        quadrature=QuadratureConfig(
            rel_tol=get("rel_tol"),
            abs_tol=get("abs_tol"),
            max_subdivisions=get("max_subdivisions"),
            hermite_nodes=get("hermite_nodes"),
            max_doublings=get("max_doublings"),
        ),
        search=SearchConfig(
            gamma_points=get("gamma_points"),
            a_points=get("a_points"),
            refine_tol=get("refine_tol"),
        ),
        monte_carlo=MonteCarloConfig(
            samples=get("samples"),
            seed=get("seed"),
            batch=get("batch"),
            threads=threads,
        ),
        entropy_samples=get("entropy_samples"),
        zec_grid=get("zec_grid"),
        tol_p=get("tol_p"),
        bands=get("bands"),
        threads=threads,
    )


def _problem(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    file_config: dict[str, Any],
    N: float | None = None,
) -> ProblemParams:
    Q = _resolve(args, file_config, "Q")
    N = N if N is not None else _resolve(args, file_config, "N")
    if Q is None or N is None:
        parser.error("--Q and --N are required (as flags or config keys)")
    return ProblemParams(Q=Q, N=N)


def cmd_two_point(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    settings: RunSettings,
    file_config: dict[str, Any],
) -> Table:
    """Tabulate (a, P, S) over an a-grid or S2(P) over a P-grid."""
    p = _problem(parser, args, file_config)
    cfg = settings.quadrature
    if args.p_grid is not None:
        _LOGGER.info("Sweeping S2(P) over %s points", len(args.p_grid))
        curve = sweep_s_vs_p("two_point", args.p_grid, p, cfg, threads=settings.threads)
        return Table(("P", "S"), list(curve.points))
    if args.a is not None:
        a_values = [args.a]
    elif args.a_grid is not None:
        a_values = args.a_grid
    else:
        parser.error("one of --a-grid, --p-grid or --a is required")
    return Table(
        ("a", "P", "S"),
        [(a, power_cost(a, p), estimation_cost(a, p, cfg)) for a in a_values],
    )


def cmd_pstar(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    settings: RunSettings,
    file_config: dict[str, Any],
) -> Table:
    """Compute P* for one N or along an N-grid."""
    if settings.tol_p <= 0:
        raise DomainError(f"--tol must be positive, got {settings.tol_p}")
    cfg = settings.quadrature
    if args.n_grid is not None:
        Q = _resolve(args, file_config, "Q")
        if Q is None:
            parser.error("--Q is required")
        _LOGGER.info("Sweeping P*(N) over %s points", len(args.n_grid))
        curve = sweep_pstar_vs_n(
            args.n_grid, Q, cfg, settings.tol_p, settings.zec_grid, settings.threads
        )
        return Table(("N", "P_star"), list(curve.points))
    p = _problem(parser, args, file_config)
    result = p_star_search(p, cfg, settings.tol_p, settings.zec_grid)
    _LOGGER.info(
        "P*=%s in [%s, %s] after %s evaluations",
        result.value,
        result.lower,
        result.upper,
        len(result.evaluations),
    )
    return Table(("N", "P_star", "a"), [(p.N, result.value, result.argmax_a)])


def cmd_nonzec(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    settings: RunSettings,
    file_config: dict[str, Any],
) -> Table:
    """Tabulate the Non-ZEC minimum per P or dump the admissible cost region."""
    p = _problem(parser, args, file_config)
    if args.p_grid is None:
        parser.error("--p-grid is required")
    cfg = settings.quadrature
    if args.mode == "region":
        gammas = args.gamma_grid or list(DEFAULT_REGION_GAMMAS)
        _LOGGER.info("Cost region over %s powers and gammas %s", len(args.p_grid), gammas)
        samples = cost_region(args.p_grid, gammas, p, cfg, settings.search.a_points)
        return Table(
            ("P", "a", "gamma", "F", "info_slack"),
            [(s.P, s.a, s.gamma, s.F_value, s.info_slack) for s in samples],
        )
    search = settings.search
    if args.gamma_grid is not None:
        gammas = args.gamma_grid
        if len(gammas) < 2 or gammas[0] != 0.0 or gammas[-1] != GAMMA_MAX:
            parser.error(f"min mode searches gamma over 0:{GAMMA_MAX}:count")
        search = SearchConfig(len(gammas), search.a_points, search.refine_tol)
    _LOGGER.info("Minimising F over %s powers", len(args.p_grid))
    rows = sweep_nonzec_argmin(args.p_grid, p, cfg, search, settings.threads)
    return Table(("P", "S", "a", "gamma"), list(rows))


def cmd_envelope(args: argparse.Namespace) -> tuple[Table, Callable[[Path], list[Path]]]:
    """Build the lower convex envelope of the input curve files."""
    curves = [ingest_csv(path) for path in args.inputs]
    envelope = lower_convex_envelope(curves)
    curve = envelope.as_curve()

    def _sidecar(out: Path) -> list[Path]:
        path = out.with_name(out.name + ".provenance.json")
        write_provenance(envelope, path)
        return [path]

    return Table((curve.x_label, curve.y_label), list(curve.points)), _sidecar


@dataclass(frozen=True)
class Check:
    """One analytic value compared against a Monte-Carlo estimate."""

    name: str
    analytic: float
    estimate: float
    std_error: float
    bands: float
    passed: bool


def _check(name: str, analytic: float, estimate: McEstimate, bands: float) -> Check:
    passed = abs(estimate.mean - analytic) <= bands * estimate.std_error + VERIFY_ABS_TOL
    return Check(name, analytic, estimate.mean, estimate.std_error, bands, passed)


def cmd_verify(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    settings: RunSettings,
    file_config: dict[str, Any],
) -> dict[str, Any]:
    """Run the oracle against the analytic power, cost and output entropy."""
    p = _problem(parser, args, file_config)
    cfg, mc, bands = settings.quadrature, settings.monte_carlo, settings.bands
    if args.V1 < 0:
        raise DomainError(f"--V1 must be nonnegative, got {args.V1}")
    P = args.V1 + power_cost(args.a, p)
    report: dict[str, Any] = {"design": {"a": args.a, "V1": args.V1, "P": P}}
    if args.gamma is None:
        if args.V1 != 0:
            parser.error("--V1 applies to Non-ZEC designs only; add --gamma")
        power_hat, cost_hat = simulate_two_point(args.a, p, mc)
        analytic_cost = estimation_cost(args.a, p, cfg)
        report["scheme"] = "two_point"
    else:
        power_hat, cost_hat = simulate_non_zec(args.a, args.gamma, args.V1, p, mc)
        analytic_cost = cost_F(args.a, args.gamma, P, p, cfg)
        report["scheme"] = "non_zec"
        report["design"]["gamma"] = args.gamma
        report["entropy_terms"] = asdict(info_terms(args.a, args.gamma, P, p, cfg))

    mixture = GaussianMixture1D.antipodal(args.a, args.V1 + p.N)
    entropy_hat = mc_entropy_bits(mixture, mc.with_samples(settings.entropy_samples))
    checks = [
        _check("power", P, power_hat, bands),
        _check("estimation_cost", analytic_cost, cost_hat, bands),
        _check("output_entropy_bits", mixture_entropy_bits(mixture, cfg), entropy_hat, bands),
    ]
    report["checks"] = [asdict(check) for check in checks]
    report["passed"] = all(check.passed for check in checks)
    return report


def _print_report(report: dict[str, Any], stream: TextIO) -> None:
    design = ", ".join(f"{k}={format_value(v)}" for k, v in report["design"].items())
    stream.write(f"{report['scheme']} design {design}\n")
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        stream.write(
            f"  {status} {check['name']}: analytic {format_value(check['analytic'])}"
            f" vs estimate {format_value(check['estimate'])}"
            f" +/- {format_value(check['std_error'])} ({check['bands']:g} s.e.)\n"
        )
    if terms := report.get("entropy_terms"):
        stream.write(
            "  entropy terms (bits): "
            + ", ".join(f"{k}={format_value(v)}" for k, v in terms.items())
            + "\n"
        )
    stream.write("PASS\n" if report["passed"] else "FAIL\n")


MANIFEST_SUFFIX = ".manifest.json"


@dataclass(frozen=True)
class RunManifest:
    """The record written next to every output file."""

    command: str
    parameters: dict[str, Any]
    argv: list[str]
    tool_version: str
    quadrature: dict[str, Any]
    search: dict[str, Any]
    monte_carlo: dict[str, Any]
    wall_time: float
    outputs: list[str]

    @classmethod
    def load(cls, path: Path) -> RunManifest:
        """Read a manifest, raising DomainError if it is unusable."""
        try:
            manifest = cls(**json.loads(path.read_text(encoding="utf-8")))
        except (OSError, TypeError, json.JSONDecodeError) as ex:
            raise DomainError(f"Cannot read manifest {path}: {ex}") from ex
        if not manifest.outputs:
            raise DomainError(f"Manifest {path} lists no outputs")
        return manifest

    def write(self, out: Path) -> Path:
        """Write the manifest beside out and return its path."""
        path = out.with_name(out.name + MANIFEST_SUFFIX)
        path.write_text(
            json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return path


def _write_manifest(
    out: Path,
    args: argparse.Namespace,
    argv: Sequence[str],
    settings: RunSettings,
    started: float,
    outputs: list[Path],
) -> None:
    parameters = {
        key: value
        for key, value in vars(args).items()
        if key not in ("out", "config", "verbose") and value is not None
    }
    RunManifest(
        command=args.command,
        parameters=json.loads(json.dumps(parameters, default=str)),
        argv=list(argv),
        tool_version=__version__,
        quadrature=asdict(settings.quadrature),
        search=asdict(settings.search),
        monte_carlo=asdict(settings.monte_carlo),
        wall_time=time.perf_counter() - started,
        outputs=[path.name for path in outputs],
    ).write(out)


def _strip_out(argv: Sequence[str]) -> list[str]:
    stripped: list[str] = []
    skip = False
    for arg in argv:
        if skip:
            skip = False
        elif arg == "--out":
            skip = True
        elif not arg.startswith("--out="):
            stripped.append(arg)
    return stripped


def cmd_replay(args: argparse.Namespace) -> int:
    """Re-run a recorded command and compare its CSV with the recorded one."""
    manifest = RunManifest.load(args.manifest)
    recorded = args.manifest.parent / manifest.outputs[0]
    if not recorded.is_file():
        raise DomainError(f"Recorded output {recorded} is missing")
    argv = manifest.argv
    with tempfile.TemporaryDirectory() as tmp:
        fresh = Path(tmp) / recorded.name
        if (code := main([*_strip_out(argv), "--out", str(fresh)])) != EXIT_OK:
            return code
        identical = fresh.read_bytes() == recorded.read_bytes()
    sys.stdout.write(f"{recorded}: {'identical' if identical else 'differs'}\n")
    return EXIT_OK if identical else EXIT_VERIFY_FAILED


def _emit(table: Table, out: Path | None) -> None:
    if out is None:
        write_table(sys.stdout, table.header, table.rows)
        return
    with out.open("w", newline="", encoding="utf-8") as stream:
        write_table(stream, table.header, table.rows)


def _run(
    parser: argparse.ArgumentParser, args: argparse.Namespace, argv: Sequence[str]
) -> int:
    if args.command == "replay":
        return cmd_replay(args)
    started = time.perf_counter()
    file_config = load_config_file(args.config)
    settings = resolve_settings(args, file_config)
    outputs: list[Path] = []
    out: Path | None = args.out

    if args.command == "verify":
        report = cmd_verify(parser, args, settings, file_config)
        _print_report(report, sys.stdout)
        if out is not None:
            out.write_text(
                json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            outputs.append(out)
            _write_manifest(out, args, argv, settings, started, outputs)
        return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED

    sidecar: Callable[[Path], list[Path]] | None = None
    if args.command == "two-point":
        table = cmd_two_point(parser, args, settings, file_config)
    elif args.command == "pstar":
        table = cmd_pstar(parser, args, settings, file_config)
    elif args.command == "nonzec":
        table = cmd_nonzec(parser, args, settings, file_config)
    else:
        table, sidecar = cmd_envelope(args)

    _emit(table, out)
    if out is not None:
        outputs.append(out)
        if sidecar is not None:
            outputs.extend(sidecar(out))
        _write_manifest(out, args, argv, settings, started, outputs)
    _LOGGER.info(
        "%s: %s rows in %.3f s",
        args.command,
        len(table.rows),
        time.perf_counter() - started,
    )
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        return _run(parser, args, argv)
    except SystemExit as ex:
        return ex.code if isinstance(ex.code, int) else EXIT_USAGE
    except USAGE_ERRORS as ex:
        sys.stderr.write(f"error: {ex}\n")
        return EXIT_USAGE
    except NUMERICAL_ERRORS as ex:
        sys.stderr.write(f"error: {ex}\n")
        return EXIT_NUMERICAL
