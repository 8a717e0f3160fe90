import math

import numpy as np
import pytest

from witsenhausen_zec import (
    DomainError,
    GaussianMixture1D,
    MonteCarloConfig,
    gaussian_entropy_bits,
    mixture_entropy_bits,
    power_cost,
    sample_non_zec,
    sample_two_point,
    simulate_non_zec,
    simulate_two_point,
)
from witsenhausen_zec.mc_oracle import McEstimate, mc_entropy_bits

SMALL = MonteCarloConfig(samples=50_000, batch=20_000)


def test_two_point_samples_are_deterministic(params):
    first = sample_two_point(0.8, params, SMALL)
    second = sample_two_point(0.8, params, SMALL)
    assert np.array_equal(first.y1, second.y1)
    assert np.array_equal(first.u2, second.u2)


def test_seed_changes_the_draws(params):
    first = sample_two_point(0.8, params, SMALL)
    second = sample_two_point(0.8, params, MonteCarloConfig(samples=50_000, batch=20_000, seed=7))
    assert not np.array_equal(first.x0, second.x0)


def test_threads_do_not_change_estimates(params):
    single = simulate_two_point(0.8, params, MonteCarloConfig(samples=50_000, batch=10_000))
    pooled = simulate_two_point(
        0.8, params, MonteCarloConfig(samples=50_000, batch=10_000, threads=4)
    )
    assert single == pooled


def test_sample_count_and_partial_batch(params):
    record = sample_two_point(0.8, params, SMALL)
    assert record.size == 50_000


def test_two_point_closed_loop_identities(params):
    a = 0.8
    record = sample_two_point(a, params, SMALL)
    assert np.array_equal(record.x1, record.x0 + record.u1)
    assert np.array_equal(record.y1, record.x1 + record.z1)
    np.testing.assert_allclose(record.x1, a * record.s, atol=1e-12)
    assert np.array_equal(record.s, np.where(record.x0 >= 0, 1.0, -1.0))
    assert np.array_equal(record.w2, a * record.s)
    np.testing.assert_allclose(record.u2, a * np.tanh(a * record.y1 / params.N))


def test_non_zec_closed_loop_identities(params):
    a, gamma, V1 = 0.8, 0.2, 0.05
    record = sample_non_zec(a, gamma, V1, params, SMALL)
    np.testing.assert_allclose(record.x1, record.w1 + a * record.s, atol=1e-12)
    assert np.array_equal(np.abs(record.w2), np.full(record.size, a))
    flips = np.mean(record.w2 != a * record.s)
    assert flips == pytest.approx(gamma, abs=5 * math.sqrt(gamma * (1 - gamma) / record.size))


def test_non_zec_laws(params):
    V1 = 0.05
    record = sample_non_zec(0.8, 0.1, V1, params, SMALL)
    n = record.size
    assert np.mean(record.x0) == pytest.approx(0.0, abs=5 * math.sqrt(params.Q / n))
    assert np.var(record.x0) == pytest.approx(params.Q, rel=0.03)
    assert np.var(record.w1) == pytest.approx(V1, rel=0.03)
    assert np.var(record.z1) == pytest.approx(params.N, rel=0.03)
    assert abs(np.corrcoef(record.w1, record.z1)[0, 1]) < 5 / math.sqrt(n)


def test_zero_signal_is_free(params):
    power, cost = simulate_two_point(0.0, params, SMALL)
    assert cost.mean == 0.0
    assert power.within(params.Q, 3.0)


def test_pure_gamma_is_free(params):
    _, cost = simulate_non_zec(0.8, 0.0, 0.05, params, SMALL)
    assert cost.mean == pytest.approx(0.0, abs=1e-12)


def test_two_point_power_matches(params):
    power, _ = simulate_two_point(0.8, params, SMALL)
    assert power.within(power_cost(0.8, params), 3.0)


def test_gaussian_entropy():
    estimate = mc_entropy_bits(GaussianMixture1D.single(0.0, 1.0), SMALL)
    assert estimate.within(gaussian_entropy_bits(1.0), 3.0)
    assert estimate.std_error < 0.01


ENTROPY_CASES = [
    [(0.5, -0.8, 0.15), (0.5, 0.8, 0.15)],
    [(0.9, 0.8, 0.15), (0.1, -0.8, 0.15)],
    [(0.5, -0.3, 0.2), (0.5, 0.3, 0.2)],
    [(0.5, -1.2, 0.35), (0.5, 1.2, 0.35)],
    [(0.7, 1.0, 2.0), (0.3, -1.0, 0.5)],
    [(0.5, -1.0, 0.2), (0.3, 0.4, 0.5), (0.2, 2.0, 0.1)],
    [(0.25, -3.0, 1.0), (0.25, -1.0, 1.0), (0.25, 1.0, 1.0), (0.25, 3.0, 1.0)],
    [(0.95, 0.0, 0.1), (0.05, 0.5, 4.0)],
]


@pytest.mark.parametrize("components", ENTROPY_CASES)
def test_entropy_matches_quadrature(cfg, components):
    m = GaussianMixture1D.from_components(components)
    estimate = mc_entropy_bits(m, MonteCarloConfig(samples=200_000, batch=50_000))
    assert estimate.within(mixture_entropy_bits(m, cfg), 4.0)


def test_entropy_is_deterministic():
    m = GaussianMixture1D.antipodal(0.8, 0.2)
    assert mc_entropy_bits(m, SMALL) == mc_entropy_bits(m, SMALL)


@pytest.mark.parametrize(
    "a,gamma,V1", [(-0.1, 0.1, 0.0), (0.8, 1.5, 0.0), (0.8, 0.1, -0.01)]
)
def test_rejects_bad_designs(params, a, gamma, V1):
    with pytest.raises(DomainError):
        simulate_non_zec(a, gamma, V1, params, SMALL)


def test_config_validation():
    with pytest.raises(DomainError):
        MonteCarloConfig(samples=10)
    with pytest.raises(DomainError):
        MonteCarloConfig(seed=-1)
    with pytest.raises(DomainError):
        MonteCarloConfig(threads=0)
    assert SMALL.with_samples(20_000).samples == 20_000


def test_within_bands():
    estimate = McEstimate(1.0, 0.1)
    assert estimate.within(1.25, 3.0)
    assert not estimate.within(1.35, 3.0)
    assert not estimate.within(1.01, 0.0)
