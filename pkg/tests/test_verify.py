import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from funcineq import measures as M
from funcineq import verify as V
from funcineq.functionals import lsi_deficit, total_variation
from funcineq.semigroup import be_constant


def test_sharp_constant_examples():
    assert V.c_lambda(1.0) == 0.5
    assert V.c_lambda(0.5) == pytest.approx((0.5 + 0.5 * math.log(0.5)) / 0.25, rel=1e-15)
    assert V.c_lambda(0.5) == pytest.approx(0.6137056, abs=1e-7)
    assert V.c_lambda(1e-14) == pytest.approx(1.0, abs=1e-12)
    assert V.c1(1.0) == 0.25 and V.c2(1.0) == 0.5
    assert V.c1(0.5) == pytest.approx(0.1931472, abs=1e-7)
    assert V.c2(0.5) == pytest.approx(0.3147229, abs=1e-7)


def test_sharp_constant_series_branch_is_continuous():
    for d in (1e-3, -1e-3):
        lam = 1 + d
        direct = (1 - lam + lam * math.log(lam)) / (1 - lam) ** 2
        assert V.c_lambda(lam * (1 + 1e-12)) == pytest.approx(direct, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=1.001, max_value=10.0))
def test_sharp_constant_is_decreasing_in_unit_interval(lam, factor):
    a, b = V.c_lambda(lam), V.c_lambda(lam * factor)
    assert 0 < b < a < 1


def test_c2_vanishes_as_lambda_goes_to_zero():
    assert V.c2(1e-8) < 1e-6
    assert V.c1(1e-8) < 1e-6


@pytest.mark.parametrize("lam", [0.25, 0.5, 2.0])
def test_be_constant_consistency(lam):
    assert be_constant(1.0, lam) == pytest.approx(V.c_lambda(lam) / 2, abs=1e-12)


def test_n02_examples():
    nu = M.gaussian_relative(0.0, 2.0)
    r = V.check_improved_lsi(nu, 0.5)
    assert r.lhs == pytest.approx(0.1534264, abs=1e-7) and abs(r.margin) < 1e-12
    r = V.check_equi(nu, 0.5)
    assert r.lhs == pytest.approx(0.0965736, abs=1e-7) and abs(r.margin) < 1e-12
    r = V.check_w2_bound(nu, 0.5)
    assert r.rhs == pytest.approx(0.3147229 * (math.sqrt(2) - 1) ** 2, abs=1e-7)
    assert r.params["talagrand_margin"] > 0
    r = V.check_hwi(nu)
    assert r.rhs == pytest.approx(0.2071068, abs=1e-7)
    r = V.check_psi_chain(nu)
    assert r.rhs == pytest.approx(0.1 * (1 - 1 / math.sqrt(2)) ** 2 / 6, abs=1e-9)
    r = V.check_tal_theorem(nu)
    assert r.lhs == pytest.approx(0.1352799, abs=1e-7)
    w = (math.sqrt(2) - 1) * math.sqrt(2 / math.pi)
    assert r.rhs == pytest.approx(w * w / 288, rel=1e-9)


def test_product_tal_example():
    nu = M.gaussian_relative(0.0, 2.0)
    r = V.check_tal_theorem(M.ProductDensity([nu, nu]))
    assert r.lhs == pytest.approx(0.2705598, abs=1e-7)
    w11 = 2 * (math.sqrt(2) - 1) * math.sqrt(2 / math.pi)
    assert r.params["W11"] == pytest.approx(w11, abs=1e-9)
    assert r.rhs == pytest.approx(w11 ** 2 / 2 / 288, rel=1e-8)
    assert r.passed


def test_deficit_checks_on_n02():
    nu = M.gaussian_relative(0.0, 2.0)
    w = (math.sqrt(2) - 1) * math.sqrt(2 / math.pi)
    h = (1 - math.log(2)) / 2
    r = V.check_deficit1(nu)
    assert r.rhs == pytest.approx(V.DEFICIT1_CONSTANT / h * min(w ** 4, w ** 2), rel=1e-8)
    assert r.passed
    r = V.check_deficit2(nu)
    assert r.passed and r.margin > 0


def test_extremal_family_sides_vanish():
    for b in (0.5, 1.0):
        nu = M.exponential_tilt(b)
        for check in (V.check_psi_chain, V.check_var1_thm, V.check_var1_w2, V.check_deficit1):
            r = check(nu)
            assert r.passed
            assert abs(r.lhs) < 1e-9 and abs(r.rhs) < 1e-9
        r = V.check_poincare11_thm(nu, 0.5)
        assert r.passed and abs(r.rhs) < 1e-9


def test_var1_example():
    nu = M.gaussian_relative(0.0, 0.9)
    r = V.check_var1_w2(nu)
    assert r.passed
    assert r.params["W2_tilt"] == pytest.approx(1 - math.sqrt(0.9), abs=1e-9)
    s = 0.9
    delta = 0.5 * (1 - 1 / s) ** 2 * s - 0.5 * (s - 1 - math.log(s))
    assert r.lhs == pytest.approx(delta, abs=1e-10)
    assert r.rhs == pytest.approx(V.VAR1_W2_CONSTANT * (1 - math.sqrt(s)) ** 4, rel=1e-8)


def test_var1_constant_is_the_infimum():
    from funcineq.transport import tilde_phi_inverse
    d = np.logspace(-10, 10, 4001)
    ratio = tilde_phi_inverse(d) / (2 * d + 2 * tilde_phi_inverse(10 * d))
    assert np.all(ratio >= V.VAR1_CONSTANT)
    assert ratio[-1] == pytest.approx(V.VAR1_CONSTANT, rel=1e-6)


def test_var1_identity_behind_the_bound():
    # int |(log f)' - b|^2 = quadratic gap + 2 int (T' - 1) + Var - 1
    from funcineq.functionals import fisher_to_tilt
    from funcineq.transport import cordero_gap_quadratic, monotone_map
    nu = M.quartic_tilt(0.5, shift=0.4)
    b = float(M.barycenter(nu))
    tmap = monotone_map(nu)
    rhs = (cordero_gap_quadratic(nu).value + 2 * nu.expect(tmap.dt_values - 1)
           + M.variance(nu) - 1)
    assert fisher_to_tilt(nu, b).value == pytest.approx(rhs, abs=1e-8)


def test_skips_are_not_failures():
    nu = M.exponential_tilt(1.0)
    r = V.check_improved_lsi(nu, 1.0)
    assert r.skipped and not r.passed and r.status == "skip"
    assert V.check_deficit1(M.standard_gaussian()).skipped
    assert V.check_var1_thm(M.gaussian_relative(0.0, 2.0)).skipped
    assert V.check_poincare11_thm(M.quartic_tilt(1.0), None).skipped
    assert V.check_poincare11_thm(M.quartic_tilt(1.0), 0.5).skipped   # deficit above 1


def test_poincare11_constant():
    from funcineq.transport import tilde_phi
    u = V.PSI_CAP
    assert float(tilde_phi(u)) == pytest.approx(10.0)
    assert V.poincare11_constant(0.5) == pytest.approx(1 / (math.sqrt(2) + 2 * u) ** 2)


def test_empty_family():
    assert V.run_suite([]) == []


def test_user_density_list():
    reps = V.run_suite([M.quartic_tilt(0.2)])
    assert reps and all(r.status != "fail" for r in reps)
    assert [r.sort_key() for r in reps] == sorted(r.sort_key() for r in reps)


def test_unknown_suite():
    with pytest.raises(ValueError):
        V.run_suite("nope")


def test_sharpness_and_exclusivity_over_analytic_suites():
    reps = V.run_suite("gaussian_scale") + V.run_suite("tilt")
    assert not [r for r in reps if r.status == "fail"]
    for r in reps:
        if r.name in ("improved_lsi", "equi") and not r.skipped:
            assert abs(r.margin) <= 1e-6
    densities = [M.gaussian_relative(0.0, s) for s in V.gaussian_scale_values()]
    densities += [M.exponential_tilt(b) for b in V.tilt_values()]
    for nu in densities:
        if lsi_deficit(nu).value <= 1e-9:
            assert total_variation(M.recenter(nu)).value <= 1e-3


def test_json_and_csv_serialization():
    reps = V.run_suite([M.gaussian_relative(0.0, 2.0)])
    doc = json.loads(V.to_json(reps, "custom"))
    assert doc["schema"] == "funcineq-report/1"
    assert list(doc)[-1] == "summary"
    assert doc["summary"]["total"] == len(reps)
    first = doc["reports"][0]
    for key in ("name", "lhs", "rhs", "margin", "tolerance", "pass", "params", "provenance"):
        assert key in first
    text = V.to_json(reps)
    assert "-0," not in text
    csv_text = V.to_csv(reps)
    assert csv_text.splitlines()[0].startswith("name,status,lhs,rhs,margin")
    assert len(csv_text.splitlines()) == len(reps) + 1


def test_json_floats_round_trip():
    x = 0.1 + 0.2
    assert float(V._json_value(x)) == x
    assert V._json_value(float("nan")) == "null"


def test_report_pass_rule():
    from funcineq.report import InequalityReport
    r = InequalityReport("x", 1.0, 1.0, -1e-9, 1e-8)
    assert r.passed
    r = InequalityReport("x", 1.0, 1.0, -1e-7, 1e-8)
    assert not r.passed and r.status == "fail"
