import math
from unittest.mock import patch

import pytest

from witsenhausen_zec import (
    DomainError,
    GaussianMixture1D,
    Infeasible,
    MonotonicityError,
    NoUpperBoundError,
    ProblemParams,
    admissible_zec,
    gaussian_entropy_bits,
    info_slack_zec,
    p2_min,
    p_star,
    p_star_search,
    power_interval,
    roots_for_power,
    s_zec,
    v1_for,
    zec_design,
)
from witsenhausen_zec.core_math import entropy_bracket

GRID = 64


def test_v1_for_values(params):
    assert v1_for(0.0, 0.7, params) == pytest.approx(0.7 - 1.0)
    assert v1_for(params.sign_gain, 0.5, params) == pytest.approx(
        0.5 - p2_min(params)[0]
    )
    assert v1_for(0.8, 0.383, params) == pytest.approx(0.01957, abs=1e-4)


def test_zec_design_validates(params):
    design = zec_design(0.8, 0.5, params)
    assert design.V1 == pytest.approx(v1_for(0.8, 0.5, params))
    with pytest.raises(DomainError):
        zec_design(3.0, 0.5, params)


def test_power_interval_matches_two_point_roots(params):
    lo, hi = power_interval(0.5, params)
    assert [lo, hi] == pytest.approx(roots_for_power(0.5, params))
    assert power_interval(0.3, params) is None


def test_slack_is_minus_one_for_a_pure_gaussian(params, cfg):
    assert info_slack_zec(0.0, params.Q, params, cfg) == pytest.approx(-1.0, abs=1e-12)


def test_slack_rejects_negative_v1(params, cfg):
    with pytest.raises(DomainError):
        info_slack_zec(3.0, 0.5, params, cfg)


@pytest.mark.parametrize("a,P", [(0.5, 0.6), (0.8, 0.4), (1.2, 0.9), (0.3, 2.0)])
def test_slack_within_bracket(params, cfg, a, P):
    v1 = v1_for(a, P, params)
    slack = info_slack_zec(a, P, params, cfg)
    gain = 0.5 * math.log2(1.0 + v1 / params.N)
    assert gain - 1.0 - 1e-9 <= slack <= gain + 1e-9


def test_slack_nonnegative_when_v1_is_large(params, cfg):
    a = 0.5
    P = 3.0 * params.N + params.Q + a * a - 2.0 * a * params.sign_gain
    assert info_slack_zec(a, P, params, cfg) >= 0.0


def test_slack_matches_bracket_of_output_mixture(params, cfg):
    v1 = v1_for(0.8, 0.5, params)
    bracket = entropy_bracket(GaussianMixture1D.antipodal(0.8, v1 + params.N))
    slack = info_slack_zec(0.8, 0.5, params, cfg)
    h_y = slack + gaussian_entropy_bits(params.N) + 1.0
    assert bracket.contains(h_y, tol=1e-9)


def test_admissible_below_floor_is_empty(params, cfg):
    result = admissible_zec(0.3, params, cfg, GRID)
    assert result.power_interval is None
    assert result.is_empty


def test_admissible_at_half(params, cfg):
    result = admissible_zec(0.5, params, cfg, GRID)
    assert not result.is_empty
    lo, hi = result.power_interval
    for a_lo, a_hi in result.feasible_subset:
        assert lo <= a_lo <= a_hi <= hi
        assert info_slack_zec(0.5 * (a_lo + a_hi), 0.5, params, cfg) >= -1e-9
    assert result.max_slack == pytest.approx(
        info_slack_zec(result.argmax_a, 0.5, params, cfg)
    )


def test_admissible_below_threshold_is_empty(params, cfg):
    result = admissible_zec(0.37, params, cfg, GRID)
    assert result.is_empty
    assert result.max_slack < 0


def test_admissible_rejects_small_grid(params, cfg):
    with pytest.raises(DomainError):
        admissible_zec(0.5, params, cfg, grid=8)


def test_feasibility_is_monotone_in_power(params, cfg):
    feasible = [
        not admissible_zec(P, params, cfg, GRID).is_empty
        for P in (0.37, 0.39, 0.45, 0.6, 0.9)
    ]
    assert feasible == sorted(feasible)


def test_s_zec(params, cfg):
    assert s_zec(0.5, params, cfg, GRID) == 0.0
    assert isinstance(s_zec(0.3, params, cfg, GRID), Infeasible)
    assert isinstance(s_zec(0.9, ProblemParams(Q=1.0, N=0.7), cfg, GRID), Infeasible)


def test_p_star_reference_value(params, cfg):
    result = p_star_search(params, cfg, grid=GRID)
    assert result.value == pytest.approx(0.383, abs=0.005)
    assert result.value >= p2_min(params)[0]
    assert result.upper - result.lower <= 1e-4
    assert info_slack_zec(result.argmax_a, result.value, params, cfg) >= -1e-9


def test_p_star_boundary_slack(params, cfg):
    assert admissible_zec(0.383, params, cfg, GRID).max_slack == pytest.approx(
        0.0, abs=0.02
    )


@pytest.mark.parametrize("N", [0.02, 0.05, 0.07])
def test_p_star_small_noise_floor(cfg, N):
    assert p_star(ProblemParams(Q=1.0, N=N), cfg, grid=GRID) == pytest.approx(
        0.363, abs=0.005
    )


def test_p_star_mid_noise(cfg):
    assert p_star(ProblemParams(Q=1.0, N=0.3), cfg, grid=GRID) == pytest.approx(
        0.501, abs=0.005
    )


@pytest.mark.slow
def test_p_star_high_noise_saturates(cfg):
    assert p_star(ProblemParams(Q=1.0, N=0.65), cfg) >= 0.995


def test_p_star_rejects_bad_tolerance(params, cfg):
    with pytest.raises(DomainError):
        p_star(params, cfg, tol_P=0.0)


def test_p_star_no_upper_bound(cfg):
    with pytest.raises(NoUpperBoundError):
        p_star(ProblemParams(Q=1.0, N=1e9), cfg, grid=16)


def test_p_star_detects_non_monotone_feasibility(params, cfg):
    def fake_feasible(P, p, cfg, grid):
        return (P >= 0.4 and not 0.69 < P < 0.75), 0.8

    with patch(
        "witsenhausen_zec.zec._zec_feasible", side_effect=fake_feasible
    ), pytest.raises(MonotonicityError):
        p_star(params, cfg)


def test_p_star_trace_is_consistent(params, cfg):
    def fake_feasible(P, p, cfg, grid):
        return P >= 0.45, 0.8

    with patch("witsenhausen_zec.zec._zec_feasible", side_effect=fake_feasible):
        result = p_star_search(params, cfg)
    assert result.value == pytest.approx(0.45, abs=1e-4)
    assert result.evaluations[0] == (p2_min(params)[0], False)
    assert (1.0, True) in result.evaluations
