import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from funcineq import functionals as F
from funcineq import measures as M


def gaussian_h(m, s):
    return 0.5 * (s - 1.0 - math.log(s) + m * m)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.8, 1.25, 2.0, 4.0])
def test_entropy_and_fisher_closed_forms(s):
    nu = M.gaussian_relative(0.0, s)
    assert F.entropy(nu).value == pytest.approx((s - 1 - math.log(s)) / 2, abs=1e-12)
    lam = 1 / s
    assert F.fisher(nu).value == pytest.approx((1 - lam) ** 2 / lam, abs=1e-12)


def test_noncentered_gaussian_against_quadrature():
    m, s = 0.7, 1.8
    nu = M.gaussian_relative(m, s)
    p = stats.norm(m, math.sqrt(s))
    logf = lambda x: p.logpdf(x) - stats.norm.logpdf(x)
    dlogf = lambda x: -(x - m) / s + x
    h = integrate.quad(lambda x: p.pdf(x) * logf(x), -np.inf, np.inf)[0]
    i = integrate.quad(lambda x: p.pdf(x) * dlogf(x) ** 2, -np.inf, np.inf)[0]
    assert F.entropy(nu).value == pytest.approx(h, abs=1e-10)
    assert F.fisher(nu).value == pytest.approx(i, abs=1e-10)


def test_tilted_gaussians_are_lsi_extremal():
    for b in (0.0, 0.5, 1.0, 2.0):
        nu = M.exponential_tilt(b)
        assert F.entropy(nu).value == pytest.approx(b * b / 2, abs=1e-12)
        assert abs(F.lsi_deficit(nu).value) < 1e-10


def test_total_variation_closed_form():
    nu = M.gaussian_relative(0.0, 2.0)
    x0 = math.sqrt(2 * math.log(2))
    tv = 4 * (stats.norm.cdf(x0) - stats.norm.cdf(x0 / math.sqrt(2)))
    assert F.total_variation(nu).value == pytest.approx(tv, abs=1e-10)


def test_total_variation_of_tilt_against_quadrature():
    nu = M.exponential_tilt(1.0)
    diff = lambda x: abs(stats.norm.pdf(x, 1) - stats.norm.pdf(x))
    oracle = integrate.quad(diff, -np.inf, 0.5)[0] + integrate.quad(diff, 0.5, np.inf)[0]
    assert F.total_variation(nu).value == pytest.approx(oracle, abs=1e-9)


def test_quartic_functionals_against_quadrature():
    a = 0.5
    z = integrate.quad(lambda x: math.exp(-a * x ** 4) * stats.norm.pdf(x), -np.inf, np.inf)[0]
    p = lambda x: math.exp(-a * x ** 4) * stats.norm.pdf(x) / z
    h = integrate.quad(lambda x: p(x) * (-a * x ** 4 - math.log(z)), -np.inf, np.inf)[0]
    i = integrate.quad(lambda x: p(x) * (4 * a * x ** 3) ** 2, -np.inf, np.inf)[0]
    nu = M.quartic_tilt(a)
    assert F.entropy(nu).value == pytest.approx(h, abs=1e-9)
    assert F.fisher(nu).value == pytest.approx(i, abs=1e-9)
    assert F.lsi_deficit(nu).value > 0


def test_fisher_to_tilt_reduces_to_fisher_at_zero():
    nu = M.quartic_tilt(0.2)
    assert F.fisher_to_tilt(nu, 0.0).value == pytest.approx(F.fisher(nu).value, rel=1e-13)


def test_product_functionals_add_up():
    a, b = M.gaussian_relative(0, 2), M.quartic_tilt(0.3)
    prod = M.ProductDensity([a, b])
    assert F.entropy(prod).value == pytest.approx(F.entropy(a).value + F.entropy(b).value)
    assert F.fisher(prod).value == pytest.approx(F.fisher(a).value + F.fisher(b).value)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-1.5, max_value=1.5), st.floats(min_value=0.3, max_value=3.5))
def test_lsi_holds_on_gaussians(m, s):
    nu = M.gaussian_relative(m, s)
    d = F.lsi_deficit(nu)
    assert d.value >= -1e-10
    assert F.entropy(nu).value == pytest.approx(gaussian_h(m, s), abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.01, max_value=2.0), st.floats(min_value=-1.0, max_value=1.0))
def test_lsi_holds_on_quartic_tilts(a, shift):
    nu = M.quartic_tilt(a, shift=shift)
    assert F.lsi_deficit(nu).value >= -1e-9
    assert 0.0 <= F.total_variation(nu).value <= 2.0
