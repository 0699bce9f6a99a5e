import math

import numpy as np
import pytest
from scipy import linalg, special

from funcineq import measures as M
from funcineq import poincare as P
from funcineq.errors import ParameterError
from funcineq.numerics import Grid1D


def ritz_gap(nu, degree=14):
    """Rayleigh-Ritz upper bound for the gap over polynomials of the given degree."""
    x = nu.nodes
    sd = math.sqrt(M.variance(nu))
    z = (x - M.barycenter(nu)) / sd
    basis = [special.eval_hermitenorm(k, z) for k in range(1, degree + 1)]
    deriv = [k * special.eval_hermitenorm(k - 1, z) / sd for k in range(1, degree + 1)]
    means = [nu.expect(b) for b in basis]
    n = degree
    a = np.empty((n, n))
    bmat = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a[i, j] = nu.expect(deriv[i] * deriv[j])
            bmat[i, j] = nu.expect((basis[i] - means[i]) * (basis[j] - means[j]))
    return float(linalg.eigh(a, bmat, eigvals_only=True)[0])


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 4.0])
def test_gaussian_gap(s):
    lam = P.spectral_gap_oracle(M.gaussian_relative(0.0, s))
    assert lam * s == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0])
def test_quartic_gap_against_ritz(a):
    nu = M.quartic_tilt(a)
    lam = P.spectral_gap_oracle(nu)
    ritz = ritz_gap(nu)
    assert ritz >= lam - 1e-6
    assert ritz == pytest.approx(lam, rel=1e-4)


def test_double_well_gap_against_ritz():
    nu = M.double_well(1.0)
    assert ritz_gap(nu, 16) == pytest.approx(P.spectral_gap_oracle(nu), rel=1e-4)


def test_deep_double_well_is_stable():
    lam = P.spectral_gap_oracle(M.double_well(3.0))
    assert 0.2 < lam < 0.3


def test_gap_is_translation_invariant():
    a = P.spectral_gap_oracle(M.quartic_tilt(0.5, shift=1.0))
    b = P.spectral_gap_oracle(M.recenter(M.quartic_tilt(0.5, shift=1.0)))
    assert a == pytest.approx(b, rel=1e-6)


def test_poincare_gap_zero_on_linear_functions_for_gaussians():
    nu = M.gaussian_relative(0.0, 2.0)
    x = nu.nodes
    assert abs(P.poincare_gap(nu, 0.5, x, np.ones_like(x))) < 1e-12


def test_muckenhoupt_brackets_the_gap():
    for nu in (M.gaussian_relative(0.0, 2.0), M.quartic_tilt(0.5), M.double_well(1.0)):
        cert = P.certify(nu)
        lo, hi = cert.bound_interval
        # 1/lambda lies within [B/2, 4B]
        assert cert.consistent_inverse
        assert lo <= 1 / cert.lambda_spectral <= hi
        assert abs(cert.median) < 1e-8


def test_spectral_oracle_requires_odd_grid():
    nu = M.gaussian_relative(0.0, 1.0, Grid1D(-10, 10, 4000))
    with pytest.raises(ParameterError):
        P.spectral_gap_oracle(nu)
