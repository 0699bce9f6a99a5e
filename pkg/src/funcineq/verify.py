"""Sharp constants, inequality checks and the built-in verification suites.

Every check returns an :class:`InequalityReport`. Lower bounds ``A >= B`` are
reported with ``lhs = A``, ``rhs = B`` and margin ``A - B``; upper bounds
``A <= B`` with margin ``B - A``; identities with minus the discrepancy.
Tolerances are ``1e-8`` plus the quadrature error estimates of the
quantities involved. A check whose hypothesis fails is reported as skipped.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FuncIneqError, ParameterError, PreconditionError
from .functionals import (entropy, entropy_2d, fisher, fisher_to_tilt, lsi_deficit,
                          total_variation)
from .measures import (GridDensity2D, ProductDensity, RelativeDensity1D, barycenter,
                       exponential_tilt, gaussian_relative, quartic_tilt, double_well,
                       recenter, standard_gaussian, variance)
from .numerics import Grid1D, integrate_abs
from .poincare import spectral_gap_details
from .report import InequalityReport, identity, lower_bound, skipped, upper_bound
from .transport import (DEFAULT_TAL_CONSTANT, cordero_gap_log, cordero_gap_quadratic,
                        psi_integral, tal_deficit, tal_lower_bound, tilde_phi,
                        tilde_phi_inverse, w11_product, w1_1d, w2_1d, w2_product,
                        w2_squared)

__all__ = [
    "InequalityReport", "c_lambda", "c1", "c2", "check_improved_lsi", "check_equi",
    "check_w2_bound", "check_talagrand", "check_tv_bound", "check_stability_centered",
    "check_hwi", "check_hwi_chain", "check_tal_theorem", "check_deficit1", "check_deficit2",
    "check_cordero_quadratic", "check_cordero_log", "check_jensen_step", "check_psi_chain",
    "check_poincare11_thm", "check_var1_thm", "check_var1_w2", "check_tensorization",
    "check_poincare_random",
    "run_suite", "summarize", "to_json", "to_csv", "SUITES",
]

BASE_TOL = 1e-8
CENTERING_TOL = 1e-6
SCHEMA = "funcineq-report/1"

DEFICIT1_CONSTANT = DEFAULT_TAL_CONSTANT ** 2 / 16.0
# (1/10) tilde_phi(u) >= (u / u*)^2 for u <= u* = tilde_phi^{-1}(10)
PSI_CAP = float(tilde_phi_inverse(10.0))
# inf over d > 0 of tilde_phi^{-1}(d) / (2 d + 2 tilde_phi^{-1}(10 d)); the
# ratio decreases to its limit 1/22 as d grows
VAR1_CONSTANT = 1.0 / 22.0
VAR1_W2_CONSTANT = VAR1_CONSTANT ** 2 / 6.0


# ---------------------------------------------------------------------------
# sharp constants

def c_lambda(lam: float) -> float:
    """``c(lambda) = (1 - lambda + lambda log lambda) / (1 - lambda)^2``.

    Uses the series ``sum_{k>=2} (-1)^k d^{k-2} / (k (k - 1))`` in
    ``d = lambda - 1`` close to ``lambda = 1``, where ``c = 1/2``.
    """
    lam = float(lam)
    if not lam > 0 or not math.isfinite(lam):
        raise ParameterError(f"lambda must be positive and finite, got {lam}")
    d = lam - 1.0
    if abs(d) < 1e-3:
        return math.fsum((-d) ** (k - 2) / (k * (k - 1)) for k in range(2, 12))
    return (-d + lam * math.log(lam)) / (d * d)


def c1(lam: float) -> float:
    """``(1 - c(lambda)) / 2``."""
    return 0.5 * (1.0 - c_lambda(lam))


def c2(lam: float) -> float:
    """``(1/c(lambda) - 1) / 2``."""
    return 0.5 * (1.0 / c_lambda(lam) - 1.0)


def poincare11_constant(lam11: float) -> float:
    """``1 / (sqrt 2 + u*/lambda11)^2`` with ``u* = tilde_phi^{-1}(10)``."""
    if not lam11 > 0:
        raise ParameterError("the (1,1)-Poincare constant must be positive")
    return 1.0 / (math.sqrt(2.0) + PSI_CAP / lam11) ** 2


# ---------------------------------------------------------------------------
# helpers

def _label(nu):
    return getattr(nu, "label", repr(nu))


def _dimension(nu):
    return nu.dimension if isinstance(nu, ProductDensity) else 1


def _offset(nu) -> float:
    return float(np.max(np.abs(np.atleast_1d(barycenter(nu)))))


def _centered(nu, name, params):
    b = _offset(nu)
    if b > CENTERING_TOL:
        return skipped(name, f"not centered (|barycenter| = {b:.3g})", params)
    return None


def _tol(*terms):
    return BASE_TOL + math.fsum(abs(t) for t in terms)


def _params(nu, **extra):
    out = {"density": _label(nu), "n": _dimension(nu)}
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# bounds driven by the Poincare constant lambda

def check_improved_lsi(nu, lam: float) -> InequalityReport:
    """``H <= c(lambda) I / 2`` for a centered ``nu`` with Poincare constant ``lambda``."""
    params = _params(nu, **{"lambda": lam})
    skip = _centered(nu, "improved_lsi", params)
    if skip:
        return skip
    h, i = entropy(nu), fisher(nu)
    k = 0.5 * c_lambda(lam)
    return upper_bound("improved_lsi", h.value, k * i.value, _tol(h.est_error, k * i.est_error),
                       dict(params, constant=k))


def check_equi(nu, lam: float) -> InequalityReport:
    """``delta_LSI >= c1(lambda) I`` (centered)."""
    params = _params(nu, **{"lambda": lam})
    skip = _centered(nu, "equi", params)
    if skip:
        return skip
    d, i = lsi_deficit(nu), fisher(nu)
    k = c1(lam)
    return lower_bound("equi", d.value, k * i.value, _tol(d.est_error, k * i.est_error),
                       dict(params, constant=k))


def check_talagrand(nu) -> InequalityReport:
    """``W2(nu, gamma)^2 <= 2 H``."""
    h, w = entropy(nu), w2_squared(nu)
    return upper_bound("talagrand", w.value, 2 * h.value, _tol(w.est_error, 2 * h.est_error),
                       _params(nu))


def check_w2_bound(nu, lam: float) -> InequalityReport:
    """``delta_LSI >= c2(lambda) W2(nu, gamma)^2`` (centered); the Talagrand margin goes in ``params``."""
    params = _params(nu, **{"lambda": lam})
    skip = _centered(nu, "w2_bound", params)
    if skip:
        return skip
    d, w = lsi_deficit(nu), w2_squared(nu)
    k = c2(lam)
    tal = check_talagrand(nu)
    return lower_bound("w2_bound", d.value, k * w.value, _tol(d.est_error, k * w.est_error),
                       dict(params, constant=k, talagrand_margin=tal.margin))


def check_tv_bound(nu: RelativeDensity1D, lam: float) -> InequalityReport:
    """``delta_LSI >= (c1(lambda)/4) ||nu - gamma||_TV^2`` (centered, one-dimensional)."""
    params = _params(nu, **{"lambda": lam})
    skip = _centered(nu, "tv_bound", params)
    if skip:
        return skip
    d, tv = lsi_deficit(nu), total_variation(nu)
    k = 0.25 * c1(lam)
    return lower_bound("tv_bound", d.value, k * tv.value ** 2,
                       _tol(d.est_error, 2 * k * tv.value * tv.est_error),
                       dict(params, constant=k, tv=tv.value))


def check_stability_centered(nu: RelativeDensity1D, lam: float) -> InequalityReport:
    """``delta_LSI >= c1(lambda) int |(log f)' - b|^2 d nu`` with ``b`` the barycenter."""
    b = float(barycenter(nu))
    params = _params(nu, **{"lambda": lam, "b": b})
    d = lsi_deficit(nu)
    j = fisher_to_tilt(nu, b)
    k = c1(lam)
    return lower_bound("stability_centered", d.value, k * j.value,
                       _tol(d.est_error, k * j.est_error), dict(params, constant=k))


# ---------------------------------------------------------------------------
# HWI and the Talagrand deficit lower bounds

def check_hwi(nu) -> InequalityReport:
    """``H <= W2 sqrt(I) - W2^2 / 2``."""
    h, i = entropy(nu), fisher(nu)
    w = w2_product(nu) if isinstance(nu, ProductDensity) else w2_1d(nu)
    ri = math.sqrt(max(i.value, 0.0))
    rhs = w.value * ri - 0.5 * w.value ** 2
    err = w.est_error * abs(ri - w.value) + w.value * i.est_error / (2 * ri) if ri > 0 else w.est_error
    return upper_bound("hwi", h.value, rhs, _tol(h.est_error, err), _params(nu, W2=w.value))


def check_hwi_chain(nu) -> InequalityReport:
    """``delta_LSI >= (sqrt(I) - W2)^2 / 2``."""
    d, i = lsi_deficit(nu), fisher(nu)
    w = w2_product(nu) if isinstance(nu, ProductDensity) else w2_1d(nu)
    ri = math.sqrt(max(i.value, 0.0))
    rhs = 0.5 * (ri - w.value) ** 2
    gap = abs(ri - w.value)
    err = gap * (w.est_error + (i.est_error / (2 * ri) if ri > 0 else 0.0))
    return lower_bound("hwi_chain", d.value, rhs, _tol(d.est_error, err), _params(nu, W2=w.value))


def check_tal_theorem(nu, c: float = DEFAULT_TAL_CONSTANT) -> InequalityReport:
    """``delta_Tal >= c min(W11^2 / n, W11 / sqrt(n))`` for centered ``nu``.

    ``params["ratio"]`` is ``delta_Tal / min(...)``, the largest constant
    this density would allow.
    """
    n = _dimension(nu)
    params = _params(nu, c=c)
    skip = _centered(nu, "tal_theorem", params)
    if skip:
        return skip
    d = tal_deficit(nu)
    w = w11_product(nu)
    base = tal_lower_bound(w.value, n, 1.0)
    slope = 2 * w.value / n if w.value * w.value / n <= w.value / math.sqrt(n) else 1 / math.sqrt(n)
    ratio = d.value / base if base > 0 else None
    return lower_bound("tal_theorem", d.value, c * base, _tol(d.est_error, c * slope * w.est_error),
                       dict(params, W11=w.value, ratio=ratio))


def check_deficit1(nu, c: float = DEFICIT1_CONSTANT) -> InequalityReport:
    """``delta_LSI >= (c / H) min(W11(nu_b)^4 / n^2, W11(nu_b)^2 / n)``.

    The default ``c`` is ``(1/288)^2 / 16``, from ``delta_LSI >=
    delta_Tal^2 / (16 H)`` composed with the Talagrand-deficit bound.
    """
    n = _dimension(nu)
    params = _params(nu, c=c)
    h = entropy(nu)
    if not h.value > h.est_error + BASE_TOL:
        return skipped("deficit1", "entropy is not positive", params)
    nub = recenter(nu)
    w = w11_product(nub)
    base = min(w.value ** 4 / n ** 2, w.value ** 2 / n)
    d = lsi_deficit(nu)
    rhs = c / h.value * base
    err = rhs * (h.est_error / h.value + 4 * w.est_error / max(w.value, 1e-300))
    return lower_bound("deficit1", d.value, rhs, _tol(d.est_error, err), dict(params, W11=w.value))


def check_deficit2(nu, c: float = DEFAULT_TAL_CONSTANT, c_prime: float | None = None
                   ) -> InequalityReport:
    """``delta_LSI >= min[c'^2 W11^4 / (2 n^2 W2^2), (sqrt(W2^2 + c W11 / sqrt n) - W2)^2 / 2]``.

    Centered ``nu`` only. The first branch uses ``c' = c / 4`` by default.
    """
    n = _dimension(nu)
    cp = c / 4.0 if c_prime is None else c_prime
    params = _params(nu, c=c, c_prime=cp)
    skip = _centered(nu, "deficit2", params)
    if skip:
        return skip
    d = lsi_deficit(nu)
    w11 = w11_product(nu)
    w2 = w2_product(nu) if isinstance(nu, ProductDensity) else w2_1d(nu)
    if w2.value == 0.0:
        return lower_bound("deficit2", d.value, 0.0, _tol(d.est_error), dict(params, W11=w11.value, W2=0.0))
    a = w11.value
    b = w2.value
    first = 0.5 * cp ** 2 * a ** 4 / (n * n * b * b)
    u = c * a / math.sqrt(n)
    # (sqrt(b^2 + u) - b)^2 written without cancellation
    second = 0.5 * (u / (math.sqrt(b * b + u) + b)) ** 2
    rhs = min(first, second)
    err = rhs * (4 * w11.est_error / max(a, 1e-300) + 2 * w2.est_error / b)
    return lower_bound("deficit2", d.value, rhs, _tol(d.est_error, err),
                       dict(params, W11=a, W2=b, branch="quartic" if first <= second else "root"))


def check_tensorization(nu: RelativeDensity1D, stride: int = 5) -> InequalityReport:
    """``delta_Tal(nu x nu) = 2 delta_Tal(nu)`` with the product entropy from 2D quadrature.

    The 2D grid takes every ``stride``-th node of the density's own grid.
    """
    g = nu.grid
    if (g.count - 1) % (2 * stride):
        raise ParameterError(f"stride {stride} does not divide the grid into an even cell count")
    count = (g.count - 1) // stride + 1
    coarse = Grid1D(g.lo, g.hi, count)
    lf = nu.logf_nodes[::stride]
    dlf = nu.dlogf_nodes[::stride]
    dens = GridDensity2D(coarse, coarse, lf[:, None] + lf[None, :],
                         np.broadcast_to(dlf[:, None], (count, count)),
                         np.broadcast_to(dlf[None, :], (count, count)), check=False)
    h2 = entropy_2d(dens)
    w2sq = w2_squared(ProductDensity([nu, nu]))
    lhs = 2 * h2.value - w2sq.value
    one = tal_deficit(nu)
    return identity("tensorization", lhs, 2 * one.value, 1e-5,
                    _params(nu, n=2, grid_points=count),
                    provenance=f"2D Simpson entropy (err {h2.est_error:.2g})")


# ---------------------------------------------------------------------------
# mass-transport chain on the line

def check_cordero_quadratic(nu: RelativeDensity1D) -> InequalityReport:
    """``2 delta_LSI >= int |T - x + (log f)'|^2 d nu``."""
    d = lsi_deficit(nu)
    q = cordero_gap_quadratic(nu)
    return lower_bound("cordero_quadratic", 2 * d.value, q.value,
                       _tol(2 * d.est_error, q.est_error), _params(nu))


def check_cordero_log(nu: RelativeDensity1D) -> InequalityReport:
    """``delta_LSI >= int (T' - 1 - log T') d nu``."""
    d = lsi_deficit(nu)
    g = cordero_gap_log(nu)
    return lower_bound("cordero_log", d.value, g.value, _tol(d.est_error, g.est_error), _params(nu))


def check_jensen_step(nu: RelativeDensity1D) -> InequalityReport:
    """``int (T' - 1 - log T') d nu >= tilde_phi(int |T' - 1| d nu) / 10``."""
    g = cordero_gap_log(nu)
    u = psi_integral(nu)
    rhs = 0.1 * float(tilde_phi(u.value))
    slope = 0.1 * _tilde_phi_slope(u.value)
    return lower_bound("jensen_step", g.value, rhs, _tol(g.est_error, slope * u.est_error),
                       _params(nu, psi=u.value))


def check_psi_chain(nu: RelativeDensity1D) -> InequalityReport:
    """``delta_LSI >= tilde_phi(int |T' - 1| d nu) / 10``."""
    d = lsi_deficit(nu)
    u = psi_integral(nu)
    rhs = 0.1 * float(tilde_phi(u.value))
    slope = 0.1 * _tilde_phi_slope(u.value)
    return lower_bound("psi_chain", d.value, rhs, _tol(d.est_error, slope * u.est_error),
                       _params(nu, psi=u.value))


def _tilde_phi_slope(u):
    u = abs(u)
    return u / 3.0 if u <= 1.0 else u / (1.0 + u)


def _abs_score(nu: RelativeDensity1D, b: float) -> float:
    return integrate_abs((nu.dlogf_nodes - b) * nu.p_nodes, nu.grid)


def check_poincare11_thm(nu: RelativeDensity1D, lam11: float | None) -> InequalityReport:
    """``delta_LSI >= c~(lambda11) (int |(log f)' - b| d nu)^2`` when ``delta_LSI <= 1``.

    ``c~ = 1 / (sqrt 2 + u*/lambda11)^2`` with ``u* = tilde_phi^{-1}(10)``.
    """
    b = float(barycenter(nu))
    params = _params(nu, lambda11=lam11, b=b)
    if lam11 is None:
        return skipped("poincare11", "no (1,1)-Poincare constant available", params)
    d = lsi_deficit(nu)
    if d.value > 1.0:
        return skipped("poincare11", f"deficit {d.value:.3g} exceeds 1", params)
    k = poincare11_constant(lam11)
    a = _abs_score(nu, b)
    a_err = abs(a - _abs_score(nu.companion(), b))
    return lower_bound("poincare11", d.value, k * a * a, _tol(d.est_error, 2 * k * a * a_err),
                       dict(params, constant=k, abs_score=a))


def _var1_gate(nu, name, params):
    v = variance(nu)
    if v > 1.0 + 1e-9:
        return v, skipped(name, f"variance {v:.6g} exceeds 1", dict(params, variance=v))
    return v, None


def check_var1_thm(nu: RelativeDensity1D, C: float = VAR1_CONSTANT) -> InequalityReport:
    """``delta_LSI >= tilde_phi(C int |(log f)' - b|^2 d nu)`` when ``Var_nu(x) <= 1``."""
    b = float(barycenter(nu))
    params = _params(nu, b=b, C=C)
    v, skip = _var1_gate(nu, "var1", params)
    if skip:
        return skip
    d = lsi_deficit(nu)
    j = fisher_to_tilt(nu, b)
    rhs = float(tilde_phi(C * j.value))
    return lower_bound("var1", d.value, rhs,
                       _tol(d.est_error, C * _tilde_phi_slope(C * j.value) * j.est_error),
                       dict(params, variance=v))


def check_var1_w2(nu: RelativeDensity1D, c: float = VAR1_W2_CONSTANT) -> InequalityReport:
    """``delta_LSI >= c W2(nu, gamma_b)^4`` when ``Var_nu(x) <= 1``; default ``c = (1/22)^2 / 6``."""
    b = float(barycenter(nu))
    params = _params(nu, b=b, c=c)
    v, skip = _var1_gate(nu, "var1_w2", params)
    if skip:
        return skip
    d = lsi_deficit(nu)
    target = exponential_tilt(b) if b != 0.0 else standard_gaussian()
    w = w2_1d(nu, target)
    rhs = c * w.value ** 4
    return lower_bound("var1_w2", d.value, rhs, _tol(d.est_error, 4 * c * w.value ** 3 * w.est_error),
                       dict(params, variance=v, W2_tilt=w.value))


def random_test_functions(x, count: int = 20, seed: int = 0):
    """``count`` pairs ``(g, g')`` on nodes ``x``: a linear part plus random bounded waves."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a0 = rng.normal()
        amp = rng.normal(size=3)
        freq = rng.uniform(0.2, 3.0, size=3)
        phase = rng.uniform(0.0, 2 * math.pi, size=3)
        arg = freq[:, None] * x[None, :] + phase[:, None]
        g = a0 * x + amp @ np.sin(arg)
        dg = a0 + (amp * freq) @ np.cos(arg)
        out.append((g, dg))
    return out


def check_poincare_random(nu: RelativeDensity1D, lam: float, count: int = 20, seed: int = 0
                          ) -> InequalityReport:
    """``lambda Var_nu(g) <= int g'^2 d nu`` over seeded random test functions (worst case)."""
    params = _params(nu, **{"lambda": lam, "count": count, "seed": seed})
    best = None
    for g, dg in random_test_functions(nu.nodes, count, seed):
        mean = nu.expect(g)
        var = nu.expect((g - mean) ** 2)
        energy = nu.expect(dg ** 2)
        if best is None or energy - lam * var < best[1] - lam * best[0]:
            best = (var, energy)
    var, energy = best
    return upper_bound("poincare_random", lam * var, energy, BASE_TOL, params)


# ---------------------------------------------------------------------------
# suites

def _guard(name: str, params: dict, fn: Callable) -> list:
    """Run ``fn``; hypothesis failures become skips and numerical errors become failures."""
    try:
        out = fn()
    except PreconditionError as exc:
        return [skipped(name, str(exc), params)]
    except (FuncIneqError, ValueError, FloatingPointError) as exc:
        return [InequalityReport(name, math.nan, math.nan, math.nan, 0.0, dict(params), "",
                                 reason=f"{type(exc).__name__}: {exc}")]
    return list(out) if isinstance(out, (list, tuple)) else [out]


def _lambda(nu):
    if isinstance(nu, ProductDensity):
        return min(spectral_gap_details(c)[0] for c in nu)
    return spectral_gap_details(nu)[0]


def _lambda11(nu: RelativeDensity1D):
    """Known (1,1)-Poincare constants: ``1/2`` for ``gamma``, scaled for ``N(m, s)``."""
    if nu.is_gaussian:
        _, s = nu._mean_var
        return 0.5 / math.sqrt(s)
    return None


def checks_1d(nu: RelativeDensity1D, lam: float | None = None, lam11="auto", seed: int = 0
              ) -> list:
    """Every one-dimensional check applicable to ``nu``."""
    out = []
    p = _params(nu)
    if lam is None:
        lam_box = _guard("poincare_constant", p, lambda: _lambda(nu))
        if isinstance(lam_box[0], InequalityReport):
            return lam_box
        lam = lam_box[0]
    if lam11 == "auto":
        lam11 = _lambda11(nu)
    jobs = [
        ("improved_lsi", lambda: check_improved_lsi(nu, lam)),
        ("equi", lambda: check_equi(nu, lam)),
        ("w2_bound", lambda: check_w2_bound(nu, lam)),
        ("talagrand", lambda: check_talagrand(nu)),
        ("tv_bound", lambda: check_tv_bound(nu, lam)),
        ("stability_centered", lambda: check_stability_centered(nu, lam)),
        ("hwi", lambda: check_hwi(nu)),
        ("hwi_chain", lambda: check_hwi_chain(nu)),
        ("tal_theorem", lambda: check_tal_theorem(nu)),
        ("deficit1", lambda: check_deficit1(nu)),
        ("deficit2", lambda: check_deficit2(nu)),
        ("cordero_quadratic", lambda: check_cordero_quadratic(nu)),
        ("cordero_log", lambda: check_cordero_log(nu)),
        ("jensen_step", lambda: check_jensen_step(nu)),
        ("psi_chain", lambda: check_psi_chain(nu)),
        ("poincare11", lambda: check_poincare11_thm(nu, lam11)),
        ("var1", lambda: check_var1_thm(nu)),
        ("var1_w2", lambda: check_var1_w2(nu)),
        ("poincare_random", lambda: check_poincare_random(nu, lam, seed=seed)),
    ]
    for name, fn in jobs:
        out.extend(_guard(name, p, fn))
    return out


def checks_product(nu: ProductDensity) -> list:
    p = _params(nu)
    lam_box = _guard("poincare_constant", p, lambda: _lambda(nu))
    if isinstance(lam_box[0], InequalityReport):
        return lam_box
    lam = lam_box[0]
    jobs = [
        ("improved_lsi", lambda: check_improved_lsi(nu, lam)),
        ("equi", lambda: check_equi(nu, lam)),
        ("w2_bound", lambda: check_w2_bound(nu, lam)),
        ("talagrand", lambda: check_talagrand(nu)),
        ("hwi", lambda: check_hwi(nu)),
        ("hwi_chain", lambda: check_hwi_chain(nu)),
        ("tal_theorem", lambda: check_tal_theorem(nu)),
        ("deficit1", lambda: check_deficit1(nu)),
        ("deficit2", lambda: check_deficit2(nu)),
    ]
    out = []
    for name, fn in jobs:
        out.extend(_guard(name, p, fn))
    comps = nu.components
    if all(c is comps[0] for c in comps) and nu.dimension == 2:
        out.extend(_guard("tensorization", p, lambda: check_tensorization(comps[0])))
    return out


def gaussian_scale_values(count: int = 15):
    return [float(s) for s in np.linspace(0.5, 4.0, count)]


def tilt_values(count: int = 9):
    return [float(b) for b in np.linspace(0.0, 2.0, count)]


def _suite_gaussian_scale(seed: int = 0) -> list:
    from .semigroup import be_check, fisher_decay_check, quadratic_potential
    out = []
    for s in gaussian_scale_values():
        nu = gaussian_relative(0.0, s)
        lam, lam_err, _ = spectral_gap_details(nu)
        out.extend(checks_1d(nu, lam, seed=seed))
        p = _params(nu, **{"lambda": lam})
        out.extend(_guard("fisher_decay", p, lambda: fisher_decay_check(nu, lam)))
        out.extend(_guard("be_check", p, lambda: be_check(quadratic_potential(), 1.0, nu, lam)))
    return out


def _suite_tilt(seed: int = 0) -> list:
    out = []
    for b in tilt_values():
        out.extend(checks_1d(exponential_tilt(b), seed=seed))
    return out


def quartic_densities():
    return [quartic_tilt(0.1), quartic_tilt(0.5), quartic_tilt(1.0),
            quartic_tilt(0.5, shift=0.5), double_well(1.0)]


def _suite_quartic(seed: int = 0) -> list:
    from .semigroup import be_check, de_bruijn_check, even_tilt, fisher_decay_check, quartic_potential
    out = []
    for nu in quartic_densities():
        lam_box = _guard("poincare_constant", _params(nu), lambda: _lambda(nu))
        if isinstance(lam_box[0], InequalityReport):
            out.extend(lam_box)
            continue
        lam = lam_box[0]
        out.extend(checks_1d(nu, lam, seed=seed))
        p = _params(nu, **{"lambda": lam})
        out.extend(_guard("fisher_decay", p, lambda: fisher_decay_check(nu, lam)))
    nu = quartic_tilt(1.0)
    out.extend(_guard("de_bruijn", _params(nu), lambda: de_bruijn_check(nu)))
    pot = quartic_potential()
    nu = even_tilt(pot)
    lam = _lambda(nu)
    out.extend(_guard("be_check", _params(nu, **{"lambda": lam}),
                      lambda: be_check(pot, 1.0, nu, lam)))
    return out


def product_densities():
    g = standard_gaussian()
    out = []
    for s in (0.5, 1.0, 2.0, 4.0):
        c = gaussian_relative(0.0, s)
        out.append(ProductDensity([c, c]))
    out.append(ProductDensity([gaussian_relative(0.0, 0.5), gaussian_relative(0.0, 2.0)]))
    q = quartic_tilt(0.5)
    out.append(ProductDensity([q, q]))
    out.append(ProductDensity([q, g]))
    return out


def _suite_product(seed: int = 0) -> list:
    out = []
    for nu in product_densities():
        out.extend(checks_product(nu))
    return out


WEHRL_PLANCK = (math.pi, 2.0 * math.pi)


def wehrl_states(h: float):
    """``(label, wave function, is_coherent)`` for the built-in phase-space suite."""
    from .wehrl import coherent_state, fock_state, superposition
    f1 = fock_state(1, h)
    ground = coherent_state(h, grid=f1.grid)
    return [
        ("coherent", ground, True),
        ("coherent_displaced", coherent_state(h, p0=1.0, q0=0.5), True),
        ("fock1", f1, False),
        ("fock2", fock_state(2, h), False),
        ("superposition", superposition([ground, f1], [1.0, 1.0]), False),
    ]


def checks_wehrl(h: float) -> list:
    from .wehrl import (carlen_identity_check, coherent_transform, wehrl_entropy,
                        wehrl_lsi_bridge)
    out = []
    for label, psi, coherent in wehrl_states(h):
        p = {"state": label, "h": h}
        try:
            rho = coherent_transform(psi)
        except FuncIneqError as exc:
            out.append(InequalityReport("wehrl_transform", math.nan, math.nan, math.nan, 0.0, p,
                                        reason=str(exc)))
            continue
        out.append(identity("wehrl_isometry", rho.mass, 1.0, 1e-6, p, "trapezoid on the phase grid"))
        s = wehrl_entropy(rho)
        out.append(lower_bound("wehrl_bound", s.value, 1.0, _tol(s.est_error), p))
        if coherent:
            out.append(identity("wehrl_coherent", s.value, 1.0, 2e-3, p))
        for name, fn in (("carlen_identity", lambda: carlen_identity_check(rho, h)),
                         ("wehrl_lsi_bridge", lambda: wehrl_lsi_bridge(rho, h))):
            for r in _guard(name, p, fn):
                r.params = dict(r.params, state=label)
                out.append(r)
    return out


def _suite_wehrl(seed: int = 0) -> list:
    out = []
    for h in WEHRL_PLANCK:
        out.extend(checks_wehrl(h))
    return out


SUITES = {
    "gaussian_scale": _suite_gaussian_scale,
    "tilt": _suite_tilt,
    "quartic": _suite_quartic,
    "product": _suite_product,
    "wehrl": _suite_wehrl,
}


def run_suite(family, seed: int = 0) -> list:
    """Run a built-in suite by name (or ``"all"``) or every 1D check over a sequence of densities.

    ``seed`` drives the random test functions of the Poincare check. Reports
    come back sorted by name and parameters, so repeated runs give identical
    output.
    """
    if isinstance(family, str):
        if family == "all":
            reports = [r for key in SUITES for r in SUITES[key](seed)]
        elif family in SUITES:
            reports = SUITES[family](seed)
        else:
            raise ParameterError(f"unknown suite {family!r}; choose from {sorted(SUITES)} or 'all'")
    else:
        reports = []
        for nu in family:
            if isinstance(nu, ProductDensity):
                reports.extend(checks_product(nu))
            else:
                reports.extend(checks_1d(nu, seed=seed))
    return sorted(reports, key=InequalityReport.sort_key)


def summarize(reports: Iterable[InequalityReport]) -> dict:
    reports = list(reports)
    return {
        "pass": sum(r.status == "pass" for r in reports),
        "fail": sum(r.status == "fail" for r in reports),
        "skip": sum(r.status == "skip" for r in reports),
        "total": len(reports),
    }


def empirical_constants(reports: Iterable[InequalityReport]) -> dict:
    """Smallest ``delta_Tal / min(W11^2/n, W11/sqrt n)`` per density family seen in ``reports``."""
    best = {}
    for r in reports:
        ratio = r.params.get("ratio") if r.name == "tal_theorem" else None
        if ratio is None:
            continue
        key = f"n={r.params.get('n', 1)}"
        best[key] = min(best.get(key, math.inf), ratio)
    return dict(sorted(best.items()))


# ---------------------------------------------------------------------------
# serialization

def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0     # folds -0.0 into 0.0
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        items = (f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return json.dumps(str(v))


def to_json(reports: Sequence[InequalityReport], suite: str = "") -> str:
    """Versioned JSON document; floats carry 17 significant digits, the summary comes last."""
    body = [_json_value(r.as_dict()) for r in reports]
    lines = ["{", f'  "schema": {json.dumps(SCHEMA)},', f'  "suite": {json.dumps(suite)},']
    if body:
        lines.append('  "reports": [')
        lines.append(",\n".join("    " + b for b in body))
        lines.append("  ],")
    else:
        lines.append('  "reports": [],')
    lines.append(f'  "summary": {_json_value(summarize(reports))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


CSV_COLUMNS = ("name", "status", "lhs", "rhs", "margin", "tolerance", "params", "provenance",
               "reason")


def to_csv(reports: Sequence[InequalityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([r.name, r.status, _csv_float(r.lhs), _csv_float(r.rhs), _csv_float(r.margin),
                    _csv_float(r.tolerance), _json_value(r.params), r.provenance, r.reason])
    return buf.getvalue()


def _csv_float(v):
    v = float(v) + 0.0
    return format(v, ".17g") if math.isfinite(v) else ""
