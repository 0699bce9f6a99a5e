import math

import numpy as np
import pytest
from scipy import stats

from funcineq import measures as M
from funcineq import semigroup as S
from funcineq.errors import PreconditionError
from funcineq.functionals import entropy
from funcineq.poincare import spectral_gap_oracle
from funcineq.verify import c_lambda


@pytest.mark.parametrize("t", [0.05, 0.5, 2.0])
def test_ou_of_gaussian_is_gaussian(t):
    s = 2.0
    out, err = S.ou_density(M.gaussian_relative(0.0, s), t)
    v = math.exp(-2 * t) * s + 1 - math.exp(-2 * t)
    x = np.linspace(-5, 5, 21)
    assert np.allclose(out.pdf(x), stats.norm.pdf(x, 0, math.sqrt(v)), atol=1e-12)
    assert err < 1e-10


def test_mehler_grid_fallback_agrees_with_hermite():
    nu = M.quartic_tilt(0.1)
    x = nu.nodes
    lf_grid, dlf_grid = S._mehler_on_grid(nu, x, 0.5)
    lf_gh, dlf_gh = S._mehler(nu, x, 0.5, S.MEHLER_MAX_ORDER)
    assert S._mehler_gap(nu, x, lf_grid, lf_gh) < 1e-10


def test_double_well_flow_passes_self_check():
    _, err = S.ou_density(M.double_well(1.0), 2.0)
    assert err < S.MEHLER_TOL


def test_lambda_t_endpoints():
    assert S.lambda_t(0.5, 0.0) == pytest.approx(0.5)
    assert S.lambda_t(0.5, 50.0) == pytest.approx(1.0)
    assert S.lambda_t(1.0, 3.0) == pytest.approx(1.0)


@pytest.mark.parametrize("nu", [M.gaussian_relative(0.0, 2.0), M.exponential_tilt(1.0)],
                         ids=["N(0,2)", "tilt1"])
def test_de_bruijn(nu):
    r = S.de_bruijn_check(nu)
    assert r.passed
    assert -r.margin < 1e-5


def test_fisher_decay_saturates_on_gaussian():
    r = S.fisher_decay_check(M.gaussian_relative(0.0, 2.0), 0.5)
    assert abs(r.margin) < 1e-10


def test_fisher_decay_needs_centering():
    with pytest.raises(PreconditionError):
        S.fisher_decay_check(M.exponential_tilt(1.0), 1.0)


def test_fp_matches_ou_for_quadratic_potential():
    nu = M.gaussian_relative(0.0, 2.0)
    fp = S.fp_evolve(S.quadratic_potential(), nu, 0.5)
    ou, _ = S.ou_density(nu, 0.5)
    x = fp.density.nodes
    assert np.max(np.abs(fp.density.pdf(x) - ou.pdf(x))) < 1e-5


def test_fp_flow_on_quartic_is_monotone_and_conserves_mass():
    pot = S.quartic_potential()
    nu = S.even_tilt(pot)
    flow = S.fp_evolve(pot, nu, 1.0, times=np.linspace(0, 1, 11))
    assert flow.is_monotone()
    assert np.all(np.diff(flow.entropies) < 0)
    assert flow.density.normalization_error < 1e-6


def test_double_well_flow_runs():
    flow = S.fp_evolve(S.double_well_potential(), M.gaussian_relative(0.0, 2.0), 0.5,
                       times=[0.25])
    assert flow.is_monotone()


@pytest.mark.parametrize("lam", [0.25, 0.5, 2.0])
def test_be_constant_matches_sharp_constant(lam):
    assert S.be_constant(1.0, lam) == pytest.approx(c_lambda(lam) / 2, abs=1e-12)


def test_be_constant_continuous_at_eta():
    eta = 2.0
    assert S.be_constant(eta, eta) == pytest.approx(1 / (4 * eta), rel=1e-14)
    assert S.be_constant(eta, eta * (1 + 1e-4)) == pytest.approx(S.be_constant(eta, eta * (1 + 2e-4)),
                                                                rel=1e-4)


def test_be_check_equality_and_strictness():
    reps = S.be_check(S.quadratic_potential(), 1.0, M.gaussian_relative(0.0, 2.0), 0.5)
    assert all(abs(r.margin) < 1e-5 for r in reps)
    pot = S.quartic_potential()
    nu = S.even_tilt(pot)
    reps = S.be_check(pot, 1.0, nu, spectral_gap_oracle(nu))
    assert all(r.passed and r.margin > 0 for r in reps)


def test_be_check_preconditions():
    with pytest.raises(PreconditionError):
        S.be_check(S.double_well_potential(), 1.0, M.gaussian_relative(0.0, 2.0), 0.5)
    with pytest.raises(PreconditionError):
        S.be_check(S.quadratic_potential(), 1.0, M.exponential_tilt(0.5), 1.0)


def test_flow_csv_header():
    flow = S.ou_evolve(M.gaussian_relative(0.0, 2.0), 1.0, times=[0.5])
    lines = flow.to_csv().splitlines()
    assert lines[0] == "t,H,I,lambda_cert"
    assert len(lines) == 4
    assert float(lines[1].split(",")[1]) == pytest.approx(entropy(M.gaussian_relative(0, 2)).value)
