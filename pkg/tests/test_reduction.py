import math

import numpy as np
import pytest

from cknlab.errors import DomainError, UnknownPreset
from cknlab.profiles import ModeFunction, gaussian, random_profile, witness
from cknlab.reduction import (
    WeightSpec,
    cross_term,
    extremal_profile,
    factorized_remainder,
    gradient_inner_product,
    gradient_seminorm_sq,
    ground_state_remainder,
    inner_product,
    radial_seminorm_sq,
    remainder_gradient,
    remainder_radial,
    seminorm_sq,
    value_norm_sq,
)
from cknlab.terms import TermSum
from conftest import oracle_norms, profile_value, radial_quad


@pytest.mark.parametrize("N", [3, 4, 5, 7])
def test_witness_norms(N):
    u = witness()
    g = math.pi ** (N / 2)
    assert gradient_seminorm_sq(u, None, N) == pytest.approx((N + 2) / 4 * g, rel=1e-12)
    assert value_norm_sq(u, -2.0, N) == pytest.approx((N + 2) / 4 * g, rel=1e-12)
    assert value_norm_sq(u, None, N) == pytest.approx(g / 2, rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_norms_match_scipy_quadrature(seed):
    N = 3 + seed % 3
    u = random_profile(seed, "mode1" if seed % 2 else "radial", N, pmax=1.0)
    for p in (0.0, 1.0, -2.0):
        value, grad = oracle_norms(u, p, N)
        assert value_norm_sq(u, p, N) == pytest.approx(value, rel=1e-10)
        assert gradient_seminorm_sq(u, p, N) == pytest.approx(grad, rel=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_gradient_radial_gap_for_mode_one(seed):
    N, p = 4, 1.0
    u = random_profile(seed, "mode1", N, pmax=p)
    gap = gradient_seminorm_sq(u, p, N) - radial_seminorm_sq(u, p, N)
    oracle = (N - 1) / N * radial_quad(lambda r: r ** (-p - 2) * profile_value(u.radial, r) ** 2, N)
    assert gap == pytest.approx(oracle, rel=1e-9)


def test_radial_functions_have_no_tangential_part():
    u = random_profile(1, "radial", 3)
    assert gradient_seminorm_sq(u, None, 3) == radial_seminorm_sq(u, None, 3)


def test_cross_mode_products_are_exactly_zero():
    u, v = gaussian(), witness()
    assert inner_product(u, v, None, 3) == 0.0
    assert gradient_inner_product(u, v, 0.0, 3) == 0.0


def test_inner_product_gaussians_closed_form():
    a, b, N = 0.7, 1.9, 3
    got = inner_product(gaussian(a), gaussian(b), None, N)
    assert got == pytest.approx((2 * math.pi / (a + b)) ** (N / 2), rel=1e-12)
    # polarization for the gradient form
    u, v = gaussian(a), gaussian(b)
    s = ModeFunction(0, u.f + v.f)
    polar = 0.5 * (gradient_seminorm_sq(s, None, N) - gradient_seminorm_sq(u, None, N) - gradient_seminorm_sq(v, None, N))
    assert gradient_inner_product(u, v, None, N) == pytest.approx(polar, rel=1e-11)


def test_weight_spec_with_extra_factor():
    u = gaussian()
    w = WeightSpec(1.0, TermSum.gauss_power(1.0, 0.0, 2.0, 2.0))
    oracle = radial_quad(lambda r: r**-1 * math.exp(-(r**2)) * math.exp(-(r**2)), 3)
    assert value_norm_sq(u, w, 3) == pytest.approx(oracle, rel=1e-11)


def test_dimension_and_form_validation():
    with pytest.raises(DomainError):
        value_norm_sq(gaussian(), None, 2)
    with pytest.raises(DomainError):
        seminorm_sq(gaussian(), None, 3, "angular")
    with pytest.raises(DomainError):
        remainder_gradient(gaussian(), 1.0, 1.0, 0.0, 3)


def test_remainder_vanishes_on_ground_state():
    # A = 1, B = r with phi = e^{-r^2/2}: the Gaussian kills the remainder
    u = gaussian()
    assert abs(remainder_gradient(u, 1.0, TermSum.monomial(1.0), 1.0, 3)) < 1e-12
    phi = TermSum.gauss_power(1.0, 0.0, 1.0, 2.0)
    assert ground_state_remainder(u, 1.0, phi, 1.0, 3) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_ground_state_form_matches_expanded_form(seed):
    N, alpha = 4, 0.8
    u = random_profile(seed, "mode1" if seed % 2 else "radial", N, pmax=-2.0)
    phi = TermSum.gauss_power(1.0, 0.0, 1.0, 2.0)
    B = TermSum.monomial(1.0)
    for form, direct in (("gradient", remainder_gradient), ("radial", remainder_radial)):
        expanded = direct(u, 1.0, B, alpha, N)
        factored = ground_state_remainder(u, 1.0, phi, alpha, N, form)
        assert factored == pytest.approx(expanded, rel=1e-9)


def test_cross_term_integration_by_parts():
    # int 2 A B u u' = -int ((AB)' + (N-1) AB / r) u^2 for A = 1, B = r
    u, N = random_profile(9, "radial", 3), 3
    lhs = cross_term(u, 1.0, TermSum.monomial(1.0), N)
    assert lhs == pytest.approx(-N * value_norm_sq(u, None, N), rel=1e-11)


@pytest.mark.parametrize("N", [3, 4, 5, 7])
def test_factorized_heisenberg_on_witness(N):
    assert factorized_remainder(witness(), "hup1", None, N) == pytest.approx(math.pi ** (N / 2), rel=1e-12)
    assert factorized_remainder(gaussian(), "hup1", None, N) == 0.0


def test_factorized_presets():
    u = random_profile(4, "radial", 5, pmax=2.0)
    assert factorized_remainder(u, "c2_grad", {"lam": 1.0}, 5) >= 0
    assert factorized_remainder(u, "c6", None, 5) >= 0
    assert factorized_remainder(u, "ckn1", {"a": 0.3, "b": 0.2}, 5) >= 0
    with pytest.raises(UnknownPreset):
        factorized_remainder(u, "nope", None, 5)
    with pytest.raises(DomainError):
        factorized_remainder(u, "ckn1", {"a": 2.0, "b": 2.0}, 5)


def test_extremal_profile_family():
    f = extremal_profile(-1.0, 0.0, beta=2.0, coeff=3.0)
    r = np.array([0.5, 1.5])
    assert np.allclose(f(r), 3.0 * np.exp(-(r**2)))
    with pytest.raises(DomainError):
        extremal_profile(2.0, 0.5)
