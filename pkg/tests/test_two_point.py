import math

import numpy as np
import pytest

from witsenhausen_zec import (
    DomainError,
    Infeasible,
    MonteCarloConfig,
    ProblemParams,
    estimation_cost,
    p2_min,
    power_cost,
    receiver,
    roots_for_power,
    s2_branches,
    s2_of_p,
    simulate_two_point,
)


def test_p2_min_is_the_vertex(params):
    floor, a_min = p2_min(params)
    assert floor == pytest.approx(1.0 - 2.0 / math.pi, abs=1e-12)
    assert a_min == pytest.approx(math.sqrt(2.0 / math.pi))
    assert power_cost(a_min, params) == pytest.approx(floor, abs=1e-10)


def test_power_cost_values(params):
    assert power_cost(0.0, params) == params.Q
    with pytest.raises(DomainError):
        power_cost(-0.1, params)


def test_estimation_cost_zero_at_zero(params, cfg):
    assert estimation_cost(0.0, params, cfg) == 0.0


@pytest.mark.parametrize("a", [0.2, 0.6, 1.0, 2.0])
def test_estimation_cost_is_bounded(params, cfg, a):
    assert 0.0 <= estimation_cost(a, params, cfg) <= a * a


@pytest.mark.parametrize("a", [0.3, 0.8, 1.5])
def test_estimation_cost_is_continuous(params, cfg, a):
    step = 1e-6
    here = estimation_cost(a, params, cfg)
    assert abs(estimation_cost(a + step, params, cfg) - here) < 1e-5
    assert abs(estimation_cost(a - step, params, cfg) - here) < 1e-5


def test_estimation_cost_near_zero_is_small(params, cfg):
    assert estimation_cost(1e-4, params, cfg) == pytest.approx(1e-8, rel=1e-6)


def test_estimation_cost_vanishes_for_large_separation(params, cfg):
    assert estimation_cost(4.0, params, cfg) < 1e-6


def test_receiver_scalar_and_array(params):
    assert receiver(0.0, 0.6, params) == 0.0
    assert receiver(10.0, 0.6, params) == pytest.approx(0.6)
    ys = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(receiver(ys, 0.6, params), 0.6 * np.tanh(4.0 * ys))


def test_roots_below_floor(params):
    assert roots_for_power(0.3, params) == []


def test_single_root_at_floor(params):
    floor, a_min = p2_min(params)
    assert roots_for_power(floor, params) == [pytest.approx(a_min)]


def test_two_roots_between_floor_and_q(params):
    roots = roots_for_power(0.5, params)
    assert len(roots) == 2
    for a in roots:
        assert power_cost(a, params) == pytest.approx(0.5, abs=1e-10)


def test_lower_root_drops_out_above_q(params):
    roots = roots_for_power(1.2, params)
    assert len(roots) == 1
    assert power_cost(roots[0], params) == pytest.approx(1.2, abs=1e-10)


def test_branches_and_best(params, cfg):
    branches = s2_branches(0.5, params, cfg)
    assert [b.P for b in branches] == [0.5, 0.5]
    assert s2_of_p(0.5, params, cfg) == min(b.S for b in branches)


def test_s2_zero_at_p_equals_q(params, cfg):
    assert s2_of_p(params.Q, params, cfg) == pytest.approx(0.0, abs=1e-12)


def test_s2_infeasible_below_floor(params, cfg):
    assert isinstance(s2_of_p(0.3, params, cfg), Infeasible)


def test_estimation_cost_matches_monte_carlo(params, cfg, fast_mc):
    power_hat, cost_hat = simulate_two_point(0.6, params, fast_mc)
    assert power_hat.within(power_cost(0.6, params), 3.0)
    assert cost_hat.within(estimation_cost(0.6, params, cfg), 3.0)


@pytest.mark.slow
@pytest.mark.parametrize("a", np.linspace(0.2, 2.0, 10).tolist())
def test_estimation_cost_matches_monte_carlo_full_size(params, cfg, a):
    power_hat, cost_hat = simulate_two_point(a, params, MonteCarloConfig(threads=4))
    assert power_hat.within(power_cost(a, params), 3.0)
    assert cost_hat.within(estimation_cost(a, params, cfg), 3.0)


def test_params_validation():
    with pytest.raises(DomainError):
        ProblemParams(Q=0.0, N=0.1)
    with pytest.raises(DomainError):
        ProblemParams(Q=1.0, N=math.inf)
