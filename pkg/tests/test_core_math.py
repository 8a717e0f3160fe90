import math

import numpy as np
import pytest

from witsenhausen_zec import (
    DomainError,
    GaussianMixture1D,
    NonConvergenceError,
    QuadratureConfig,
    binary_entropy_bits,
    entropy_bracket,
    gaussian_entropy_bits,
    integrate_1d,
    integrate_2d,
    mixture_entropy_bits,
    mixture_pdf,
)
from witsenhausen_zec.core_math import mixture_logpdf, std_normal_pdf

THREE_PEAKS = GaussianMixture1D.from_components(
    [(0.5, -1.0, 0.2), (0.3, 0.4, 0.5), (0.2, 2.0, 0.1)]
)


def test_gaussian_entropy_unit_variance():
    assert gaussian_entropy_bits(1.0) == pytest.approx(2.0470956, abs=1e-7)


def test_single_component_is_closed_form(cfg):
    m = GaussianMixture1D.single(0.3, 0.15)
    assert mixture_entropy_bits(m, cfg) == gaussian_entropy_bits(0.15)


def test_zero_weight_component_is_dropped(cfg):
    m = GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=1.0)
    assert mixture_entropy_bits(m, cfg) == gaussian_entropy_bits(0.15)


def test_coincident_components_merge(cfg):
    m = GaussianMixture1D.antipodal(0.0, 0.4)
    assert len(m.reduced().components) == 1
    assert mixture_entropy_bits(m, cfg) == gaussian_entropy_bits(0.4)


def test_well_separated_mixture_gains_one_bit(cfg):
    m = GaussianMixture1D.antipodal(50.0, 1.0)
    assert mixture_entropy_bits(m, cfg) == pytest.approx(
        gaussian_entropy_bits(1.0) + 1.0, abs=1e-7
    )


@pytest.mark.parametrize("a,weight", [(0.3, 0.5), (0.8, 0.9), (1.5, 0.1), (0.8, 0.5)])
def test_entropy_within_bracket(cfg, a, weight):
    m = GaussianMixture1D.antipodal(a, 0.15, weight_plus=weight)
    assert entropy_bracket(m).contains(mixture_entropy_bits(m, cfg), tol=1e-9)


def test_entropy_mirror_symmetry(cfg):
    left = GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=0.9)
    right = GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=0.1)
    assert mixture_entropy_bits(left, cfg) == pytest.approx(
        mixture_entropy_bits(right, cfg), abs=1e-9
    )


def test_entropy_translation_invariance(cfg):
    shifted = GaussianMixture1D.from_components(
        (w, mu + 2.5, v) for w, mu, v in THREE_PEAKS.components
    )
    assert mixture_entropy_bits(shifted, cfg) == pytest.approx(
        mixture_entropy_bits(THREE_PEAKS, cfg), abs=1e-8
    )


@pytest.mark.parametrize("c", [0.5, 2.5])
def test_entropy_scaling_adds_log_c(cfg, c):
    scaled = GaussianMixture1D.from_components(
        (w, c * mu, c * c * v) for w, mu, v in THREE_PEAKS.components
    )
    assert mixture_entropy_bits(scaled, cfg) == pytest.approx(
        mixture_entropy_bits(THREE_PEAKS, cfg) + math.log2(c), abs=1e-7
    )


def test_entropy_bracket_width_is_mixing_entropy():
    bracket = entropy_bracket(GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=0.9))
    assert bracket.upper_bits - bracket.lower_bits == pytest.approx(
        binary_entropy_bits(0.1)
    )


def test_mixture_validation():
    with pytest.raises(DomainError):
        GaussianMixture1D.from_components([(0.5, 0.0, 1.0), (0.4, 1.0, 1.0)])
    with pytest.raises(DomainError):
        GaussianMixture1D.single(0.0, 0.0)
    with pytest.raises(DomainError):
        GaussianMixture1D(())


def test_mixture_moments():
    m = GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=0.75)
    assert m.mean == pytest.approx(0.4)
    assert m.variance == pytest.approx(0.15 + 0.64 - 0.16)


def test_std_normal_pdf_values():
    assert std_normal_pdf(0.0) == pytest.approx(0.3989422804, abs=1e-10)
    assert std_normal_pdf(-1.3) == std_normal_pdf(1.3)
    assert std_normal_pdf(2.0) == pytest.approx(
        math.exp(-2.0) / math.sqrt(2.0 * math.pi), rel=1e-12
    )


def test_mixture_pdf_is_the_weighted_sum():
    m = GaussianMixture1D.from_components([(0.7, 1.0, 2.0), (0.3, -1.0, 0.5)])
    expected = 0.7 * std_normal_pdf(-0.5 / math.sqrt(2.0)) / math.sqrt(2.0)
    expected += 0.3 * std_normal_pdf(1.5 / math.sqrt(0.5)) / math.sqrt(0.5)
    assert mixture_pdf(m, 0.5) == pytest.approx(expected, rel=1e-12)
    assert float(mixture_pdf(m, np.array([0.5]))[0]) == pytest.approx(expected, rel=1e-12)


def test_symmetric_pair_pdf_at_origin():
    m = GaussianMixture1D.antipodal(0.8, 0.15)
    assert mixture_pdf(m, 0.0) == pytest.approx(
        std_normal_pdf(0.8 / math.sqrt(0.15)) / math.sqrt(0.15), rel=1e-12
    )


def test_pdf_integrates_to_one(cfg):
    m = GaussianMixture1D.antipodal(0.8, 0.15, weight_plus=0.3)
    assert integrate_1d(lambda y: mixture_pdf(m, y), m.window(), cfg) == pytest.approx(
        1.0, abs=1e-9
    )


def test_pdf_scalar_and_array_agree():
    m = GaussianMixture1D.antipodal(0.8, 0.15)
    ys = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(
        mixture_pdf(m, ys), [mixture_pdf(m, float(y)) for y in ys], rtol=1e-12
    )


def test_logpdf_is_finite_in_the_tails():
    m = GaussianMixture1D.antipodal(0.8, 0.15)
    assert np.all(np.isfinite(mixture_logpdf(m, np.array([-60.0, 60.0]))))


def test_binary_entropy():
    assert binary_entropy_bits(0.0) == 0.0
    assert binary_entropy_bits(1.0) == 0.0
    assert binary_entropy_bits(0.5) == pytest.approx(1.0)
    assert binary_entropy_bits(0.1) == pytest.approx(0.4689956, abs=1e-7)
    with pytest.raises(DomainError):
        binary_entropy_bits(1.5)


def test_integrate_1d_infinite_domain(cfg):
    value = integrate_1d(lambda x: math.exp(-x * x), (-math.inf, math.inf), cfg)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-8)


def test_integrate_1d_reports_subdivision_limit():
    with pytest.raises(NonConvergenceError, match="subdivision limit"):
        integrate_1d(
            lambda x: math.sin(1000.0 * x),
            (0.0, 100.0),
            QuadratureConfig(max_subdivisions=8),
        )


def test_integrate_2d_gaussian(cfg):
    hint = GaussianMixture1D.single(0.0, 1.0)
    value = integrate_2d(
        lambda x, y: np.exp(-0.5 * (x * x + y * y)), (hint, hint), cfg
    )
    assert value == pytest.approx(2.0 * math.pi, rel=1e-10)


def test_integrate_2d_follows_the_hint(cfg):
    hx = GaussianMixture1D.single(3.0, 0.02)
    hy = GaussianMixture1D.single(-1.0, 0.5)
    value = integrate_2d(
        lambda x, y: np.exp(-0.5 * (x - 3.0) ** 2 / 0.02 - 0.5 * (y + 1.0) ** 2 / 0.5),
        (hx, hy),
        cfg,
    )
    assert value == pytest.approx(2.0 * math.pi * math.sqrt(0.02 * 0.5), rel=1e-10)


def test_integrate_2d_gives_up_after_doublings():
    hint = GaussianMixture1D.single(0.0, 1.0)
    with pytest.raises(NonConvergenceError):
        integrate_2d(
            lambda x, y: np.cos(40.0 * x) + 0.0 * y,
            (hint, hint),
            QuadratureConfig(hermite_nodes=8, max_doublings=1),
        )


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(hermite_nodes=4)
