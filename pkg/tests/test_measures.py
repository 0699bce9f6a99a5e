import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from funcineq import measures as M
from funcineq.errors import DegenerateDensityError, ParameterError
from funcineq.numerics import Grid1D


@pytest.mark.parametrize("m,s", [(0.0, 1.0), (0.3, 2.0), (-1.0, 0.5)])
def test_gaussian_moments(m, s):
    nu = M.gaussian_relative(m, s)
    assert nu.normalization_error < 1e-10
    assert M.barycenter(nu) == pytest.approx(m, abs=1e-10)
    assert M.variance(nu) == pytest.approx(s, rel=1e-9)


def test_tilt_is_translated_gaussian():
    nu = M.exponential_tilt(1.5)
    x = np.linspace(-3, 5, 11)
    expected = -0.5 * (x - 1.5) ** 2 - 0.5 * math.log(2 * math.pi)
    assert np.allclose(nu.log_pdf(x), expected, atol=1e-12)


def test_quartic_tilt_is_symmetric_and_normalized():
    nu = M.quartic_tilt(0.5)
    assert abs(M.barycenter(nu)) < 1e-12
    assert nu.normalization_error < 1e-8
    assert nu.dlogf(np.array([1.0]))[0] == pytest.approx(-2.0, abs=1e-6)


def test_recenter_is_translation():
    nu = M.quartic_tilt(0.5, shift=0.7)
    b = M.barycenter(nu)
    r = M.recenter(nu)
    assert abs(M.barycenter(r)) < 1e-9
    x = np.linspace(-2, 2, 9)
    assert np.allclose(r.log_pdf(x), nu.log_pdf(x + b), atol=1e-9)


def test_product_density_barycenter():
    nu = M.ProductDensity([M.gaussian_relative(0.0, 2.0), M.exponential_tilt(1.0)])
    assert nu.dimension == 2
    assert np.allclose(M.barycenter(nu), [0.0, 1.0], atol=1e-10)


def test_grid_file_round_trip(tmp_path):
    nu = M.quartic_tilt(0.3)
    path = tmp_path / "q.txt"
    M.save_grid_density(nu, path)
    back = M.load_grid_density(path)
    assert np.allclose(back.logf_nodes, nu.logf_nodes, atol=1e-12)


def test_grid_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("no header\n1\t2\n")
    with pytest.raises(ParameterError):
        M.load_grid_density(path)


def test_normalize_rejects_nonfinite():
    g = Grid1D(-5, 5, 11)
    with pytest.raises(DegenerateDensityError):
        M.normalize(np.full(11, np.nan), g)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=0.3, max_value=3.0))
def test_gaussian_cdf_matches_closed_form(m, s):
    from scipy import stats
    nu = M.gaussian_relative(m, s)
    x = np.linspace(m - 3, m + 3, 7)
    assert np.allclose(nu.cdf(x), stats.norm.cdf(x, m, math.sqrt(s)), atol=1e-10)
