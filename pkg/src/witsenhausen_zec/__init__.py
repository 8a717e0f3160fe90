from __future__ import annotations

__version__ = "0.1.0"

from .core_math import (
    EntropyBracket,
    GaussianMixture1D,
    binary_entropy_bits,
    entropy_bracket,
    gaussian_entropy_bits,
    integrate_1d,
    integrate_2d,
    mixture_entropy_bits,
    mixture_pdf,
)
from .exc import (
    CurveParseError,
    DegenerateInputError,
    DomainError,
    EmptyCurveFileError,
    MonotonicityError,
    NonConvergenceError,
    NoUpperBoundError,
    SweepTimeoutError,
    WitsenhausenError,
)
from .frontier import (
    Curve,
    Envelope,
    async_sweep_pstar_vs_n,
    async_sweep_s_vs_p,
    ingest_csv,
    lower_convex_envelope,
    sweep_pstar_vs_n,
    sweep_s_vs_p,
    write_csv,
    write_table,
)
from .mc_oracle import (
    McEstimate,
    SampleRecord,
    cross_term,
    mc_entropy_bits,
    sample_non_zec,
    sample_two_point,
    simulate_non_zec,
    simulate_two_point,
)
from .models import (
    CostResult,
    Infeasible,
    MonteCarloConfig,
    ProblemParams,
    QuadratureConfig,
    SearchConfig,
    is_feasible,
)
from .non_zec import (
    CostSurfaceSample,
    NonZecDesign,
    cond_entropy_y_given_w,
    cost_F,
    cost_region,
    info_slack_nonzec,
    mmse_integrand,
    posterior_mean,
    s_nonzec,
)
from .retry import retry_on_nonconvergence
from .two_point import (
    TwoPointEval,
    estimation_cost,
    p2_min,
    power_cost,
    receiver,
    roots_for_power,
    s2_branches,
    s2_of_p,
)
from .zec import (
    AdmissibleInterval,
    PStarResult,
    ZecDesign,
    admissible_zec,
    info_slack_zec,
    p_star,
    p_star_search,
    power_interval,
    s_zec,
    v1_for,
    zec_design,
)

__all__ = [
    "AdmissibleInterval",
    "CostResult",
    "CostSurfaceSample",
    "Curve",
    "CurveParseError",
    "DegenerateInputError",
    "DomainError",
    "EmptyCurveFileError",
    "EntropyBracket",
    "Envelope",
    "GaussianMixture1D",
    "Infeasible",
    "McEstimate",
    "MonotonicityError",
    "MonteCarloConfig",
    "NoUpperBoundError",
    "NonConvergenceError",
    "NonZecDesign",
    "PStarResult",
    "ProblemParams",
    "QuadratureConfig",
    "SampleRecord",
    "SearchConfig",
    "SweepTimeoutError",
    "TwoPointEval",
    "WitsenhausenError",
    "ZecDesign",
    "admissible_zec",
    "async_sweep_pstar_vs_n",
    "async_sweep_s_vs_p",
    "binary_entropy_bits",
    "cond_entropy_y_given_w",
    "cost_F",
    "cost_region",
    "cross_term",
    "entropy_bracket",
    "estimation_cost",
    "gaussian_entropy_bits",
    "info_slack_nonzec",
    "info_slack_zec",
    "ingest_csv",
    "integrate_1d",
    "integrate_2d",
    "is_feasible",
    "lower_convex_envelope",
    "mc_entropy_bits",
    "mixture_entropy_bits",
    "mixture_pdf",
    "mmse_integrand",
    "p2_min",
    "p_star",
    "p_star_search",
    "posterior_mean",
    "power_cost",
    "power_interval",
    "receiver",
    "retry_on_nonconvergence",
    "roots_for_power",
    "s2_branches",
    "s2_of_p",
    "s_nonzec",
    "s_zec",
    "sample_non_zec",
    "sample_two_point",
    "simulate_non_zec",
    "simulate_two_point",
    "sweep_pstar_vs_n",
    "sweep_s_vs_p",
    "v1_for",
    "write_csv",
    "write_table",
    "zec_design",
]
