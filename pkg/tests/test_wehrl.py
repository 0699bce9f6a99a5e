import math

import numpy as np
import pytest
from scipy import special

from funcineq import wehrl as W
from funcineq.errors import ParameterError

PLANCKS = [math.pi, 2 * math.pi, 6.62]


def fock_wehrl(n):
    """Closed form ``1 + n + log n! - n digamma(n + 1)`` of the Husimi entropy of level ``n``."""
    return 1 + n + special.gammaln(n + 1) - n * special.digamma(n + 1)


@pytest.mark.parametrize("h", PLANCKS)
def test_isometry_and_coherent_entropy(h):
    rho = W.coherent_transform(W.coherent_state(h, p0=0.4, q0=-0.3))
    assert rho.mass == pytest.approx(1.0, abs=1e-10)
    assert W.wehrl_entropy(rho).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("h", PLANCKS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_fock_entropy_closed_form(h, n):
    rho = W.coherent_transform(W.fock_state(n, h))
    assert W.wehrl_entropy(rho).value == pytest.approx(fock_wehrl(n), abs=1e-6)


@pytest.mark.parametrize("h", PLANCKS)
def test_ground_state_matches_gaussian_profile(h):
    rho = W.coherent_transform(W.coherent_state(h))
    ref = W.gaussian_profile(h, pgrid=rho.pgrid, qgrid=rho.qgrid)
    assert np.max(np.abs(rho.values - ref.values)) < 1e-12


def test_phase_factor_does_not_change_density():
    psi = W.fock_state(1, math.pi)
    a = W.coherent_transform(psi, include_phase=True)
    b = W.coherent_transform(psi, include_phase=False)
    assert np.max(np.abs(a.values - b.values)) < 1e-13


def test_coherent_state_barycenter():
    h = 2 * math.pi
    rho = W.coherent_transform(W.coherent_state(h, p0=1.0, q0=0.5))
    assert np.allclose(rho.barycenter(), [1.0, 0.5], atol=1e-9)


@pytest.mark.parametrize("h", PLANCKS)
def test_carlen_identity(h):
    for psi in (W.coherent_state(h), W.fock_state(1, h), W.fock_state(2, h)):
        r = W.carlen_identity_check(W.coherent_transform(psi), h)
        assert r.rhs == pytest.approx(4 * math.pi / h)
        assert r.passed and -r.margin < 1e-6


@pytest.mark.parametrize("h", [math.pi, 2 * math.pi])
def test_bridge_on_superposition(h):
    f1 = W.fock_state(1, h)
    psi = W.superposition([W.coherent_state(h, grid=f1.grid), f1], [1.0, 1.0j])
    rho = W.coherent_transform(psi)
    r = W.wehrl_lsi_bridge(rho, h)
    assert r.passed and -r.margin < 1e-4
    assert r.params["barycenter_gap"] < 1e-8


def test_deficit_is_nonnegative():
    rho = W.coherent_transform(W.fock_state(2, math.pi))
    assert W.wehrl_deficit(rho).value > 0.8


def test_fm_hessian_report_on_coherent_state():
    h = 2 * math.pi
    r = W.fm_hessian_check(W.coherent_transform(W.coherent_state(h)), h)
    assert abs(r.lhs) < 1e-6
    assert r.passed


def test_bad_inputs():
    with pytest.raises(ParameterError):
        W.coherent_state(-1.0)
    h = math.pi
    with pytest.raises(ParameterError):
        W.superposition([W.coherent_state(h), W.fock_state(1, h)], [1, 1])


def test_phase_space_csv_header():
    rho = W.gaussian_profile(math.pi, pgrid=None, qgrid=None)
    head = rho.to_csv().splitlines()[:2]
    assert head[0] == "p,q,rho"
