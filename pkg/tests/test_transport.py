import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, stats

from funcineq import measures as M
from funcineq import transport as T
from funcineq.errors import ParameterError, SizeError
from funcineq.functionals import entropy

SCALES = [0.5, 2.0, 4.0]


@pytest.mark.parametrize("s", SCALES)
def test_w2_and_w1_closed_forms(s):
    nu = M.gaussian_relative(0.0, s)
    gap = abs(math.sqrt(s) - 1.0)
    assert T.w2_1d(nu).value == pytest.approx(gap, abs=1e-10)
    for method in ("cdf", "coupling"):
        assert T.w1_1d(nu, method=method).value == pytest.approx(gap * math.sqrt(2 / math.pi), abs=1e-9)


def test_w2_between_two_gaussians():
    a, b = M.gaussian_relative(0.5, 2.0), M.gaussian_relative(-0.5, 0.5)
    expected = math.sqrt(1.0 + (math.sqrt(2.0) - math.sqrt(0.5)) ** 2)
    assert T.w2_1d(a, b).value == pytest.approx(expected, abs=1e-9)


def test_w1_quartic_against_cdf_quadrature():
    a = 1.0
    z = integrate.quad(lambda x: math.exp(-a * x ** 4) * stats.norm.pdf(x), -np.inf, np.inf)[0]
    cdf = lambda x: integrate.quad(lambda t: math.exp(-a * t ** 4) * stats.norm.pdf(t) / z, -np.inf, x)[0]
    # by symmetry W1 = 2 int_{-inf}^0 (G - F) dx with F the quartic CDF
    oracle = 2 * integrate.quad(lambda x: stats.norm.cdf(x) - cdf(x), -12, 0, limit=200)[0]
    nu = M.quartic_tilt(a)
    assert T.w1_1d(nu).value == pytest.approx(oracle, abs=1e-8)


def test_monotone_map_pushes_forward_and_is_increasing():
    nu = M.quartic_tilt(0.5, shift=0.3)
    tmap = T.monotone_map(nu)
    assert np.all(np.diff(tmap.t_values) > 0)
    assert tmap.pushforward_error() < 1e-10
    x = np.linspace(-1, 1, 5)
    h = 1e-5
    fd = (tmap(x + h) - tmap(x - h)) / (2 * h)
    assert np.allclose(tmap.derivative(x), fd, rtol=1e-6)


def test_gaussian_map_is_linear():
    tmap = T.monotone_map(M.gaussian_relative(0.0, 2.0))
    x = np.linspace(-3, 3, 13)
    assert np.allclose(tmap(x), x / math.sqrt(2.0), atol=1e-10)


def test_tal_deficit_of_n02_and_tensorization():
    nu = M.gaussian_relative(0.0, 2.0)
    expected = 2.0 - 1.0 - math.log(2.0) - (math.sqrt(2.0) - 1.0) ** 2
    assert T.tal_deficit(nu).value == pytest.approx(expected, abs=1e-12)
    assert T.tal_deficit(M.ProductDensity([nu, nu])).value == pytest.approx(2 * expected, abs=1e-12)
    assert T.w11_product(M.ProductDensity([nu, nu])).value == pytest.approx(
        2 * (math.sqrt(2) - 1) * math.sqrt(2 / math.pi), abs=1e-9)


def test_tal_lower_bound_branches():
    assert T.tal_lower_bound(0.5, 1, 1.0) == pytest.approx(0.25)
    assert T.tal_lower_bound(4.0, 1, 1.0) == pytest.approx(4.0)
    assert T.tal_lower_bound(0.0, 3) == 0.0
    with pytest.raises(ParameterError):
        T.tal_lower_bound(-1.0, 1)


def test_talagrand_and_hwi_on_quartic():
    nu = M.quartic_tilt(0.5)
    h = entropy(nu).value
    w = T.w2_1d(nu).value
    assert w * w <= 2 * h


def test_discrete_oracle_matches_monotone_matching():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = int(rng.integers(1, 7))
        a, b = rng.normal(size=k), rng.normal(size=k)
        assert T.discrete_ot_oracle(a, b) == T.monotone_matching_cost(a, b)


def test_discrete_oracle_against_linear_sum_assignment():
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(2, 8))
        a, b = rng.normal(size=(k, 2)), rng.normal(size=(k, 2))
        for cost in ("l1", "l2_squared"):
            c = T.cost_matrix(T.DiscreteMeasure(a), T.DiscreteMeasure(b), cost)
            rows, cols = optimize.linear_sum_assignment(c)
            assert T.discrete_ot_oracle(a, b, cost) == pytest.approx(c[rows, cols].sum(), abs=1e-12)


def test_discrete_oracle_total_cost_convention():
    assert T.discrete_ot_oracle([0.0, 1.0], [2.0, 3.0], "l1") == 4.0
    total, perm = T.discrete_ot_oracle([0.0, 3.0], [3.0, 0.0], "l2_squared", return_assignment=True)
    assert total == 0.0 and list(perm) == [1, 0]


def test_discrete_oracle_size_limit():
    with pytest.raises(SizeError):
        T.discrete_ot_oracle(np.zeros(9), np.zeros(9))
    with pytest.raises(ParameterError):
        T.discrete_ot_oracle(np.zeros(2), np.zeros(3))


def test_tilde_phi_pieces():
    assert T.tilde_phi(1.0) == pytest.approx(1 / 6)
    # continuous at 1 and even
    assert T.tilde_phi(1.0 + 1e-12) == pytest.approx(1 / 6, abs=1e-10)
    assert T.tilde_phi(-2.0) == T.tilde_phi(2.0)
    t = np.linspace(-1 + 1e-3, 20, 500)
    assert np.all(T.phi(t) >= 0.1 * T.tilde_phi(t) - 1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e6))
def test_tilde_phi_inverse_round_trip(y):
    u = T.tilde_phi_inverse(y)
    assert u >= 0
    assert T.tilde_phi(u) == pytest.approx(y, rel=1e-11, abs=1e-14)


def test_tilde_phi_inverse_far_branch():
    assert T.tilde_phi_inverse(1e300) == pytest.approx(1e300, rel=1e-12)


def test_cordero_quantities_on_n02():
    nu = M.gaussian_relative(0.0, 2.0)
    r = 1 / math.sqrt(2)
    assert T.cordero_gap_quadratic(nu).value == pytest.approx(2 * (r - 0.5) ** 2, abs=1e-10)
    assert T.cordero_gap_log(nu).value == pytest.approx(r - 1 - math.log(r), abs=1e-10)
    assert T.psi_integral(nu).value == pytest.approx(1 - r, abs=1e-10)


def test_psi_integral_on_quartic_against_direct_quadrature():
    nu = M.quartic_tilt(1.0)
    tmap = T.monotone_map(nu)
    direct = nu.expect(np.abs(tmap.dt_values - 1.0))
    assert T.psi_integral(nu).value == pytest.approx(direct, abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0))
def test_w2_property_on_scales(s):
    nu = M.gaussian_relative(0.0, s)
    assert T.w2_1d(nu).value == pytest.approx(abs(math.sqrt(s) - 1), abs=1e-9)
