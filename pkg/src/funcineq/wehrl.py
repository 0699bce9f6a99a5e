"""Coherent state transform on the line and the Wehrl entropy.

Conventions (one degree of freedom): ``h_star = h / (2 pi)``,
``dmu_h = dp dq / h`` and

    L psi(p, q) = C e^{i p q / 2 h*} int e^{i p x / h*} e^{-(x - q)^2 / 2 h*} psi(x) dx

with ``C = (pi h*)^{-1/4}``. This constant makes ``psi -> L psi`` an isometry
from ``L^2(dx)`` into ``L^2(dmu_h)``. The x-integral is evaluated by the
trapezoid rule on the wave-function grid, which is spectrally accurate for
the Gaussian-windowed integrands involved.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import AccuracyError, ParameterError
from .functionals import FunctionalValue, entropy_2d, fisher_2d
from .measures import GridDensity2D
from .numerics import Grid1D, trapezoid_weights
from .report import InequalityReport, identity

RHO_THRESHOLD = 1e-12
PHASE_POINTS = 256
X_POINTS = 513


def _hstar(h):
    if not h > 0:
        raise ParameterError("Planck constant must be positive")
    return h / (2.0 * math.pi)


@dataclass(frozen=True)
class WaveFunction1D:
    """Normalized complex wave function sampled on a grid."""

    grid: Grid1D
    values: np.ndarray
    planck: float
    center: tuple = (0.0, 0.0)
    label: str = "psi"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.count,):
            raise ParameterError("wave function values do not match the grid")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        _hstar(self.planck)
        err = abs(self.norm_squared - 1.0)
        if err > 1e-8:
            raise ParameterError(f"wave function not normalized (|psi|^2 integrates to 1{err:+.2e})")

    @property
    def h_star(self) -> float:
        return _hstar(self.planck)

    @property
    def norm_squared(self) -> float:
        w = trapezoid_weights(self.grid.count, self.grid.spacing)
        return float(w @ np.abs(self.values) ** 2)


def _x_grid(h, q0, n=0, count=X_POINTS):
    s = math.sqrt(_hstar(h))
    half = (12.0 + 2.0 * math.sqrt(n)) * s
    return Grid1D(q0 - half, q0 + half, count)


def coherent_state(h: float, p0: float = 0.0, q0: float = 0.0, grid: Grid1D | None = None
                   ) -> WaveFunction1D:
    """Gaussian of width ``sqrt(h*)`` at ``q0`` with momentum label ``p0``.

    The phase ``e^{-i p0 x / h*}`` is chosen so that ``|L psi|^2`` is the
    Gaussian ``exp(-pi((p - p0)^2 + (q - q0)^2) / h)``.
    """
    hs = _hstar(h)
    grid = grid or _x_grid(h, q0)
    x = grid.nodes
    psi = (math.pi * hs) ** -0.25 * np.exp(-(x - q0) ** 2 / (2 * hs) - 1j * p0 * x / hs)
    return WaveFunction1D(grid, psi, h, (p0, q0), f"coherent(p0={p0:g},q0={q0:g})")


def fock_state(n: int, h: float, q0: float = 0.0, grid: Grid1D | None = None) -> WaveFunction1D:
    """Hermite function of order ``n`` with width matched to ``h*`` (``n = 0`` is the ground state)."""
    if n < 0:
        raise ParameterError("Fock index must be nonnegative")
    hs = _hstar(h)
    grid = grid or _x_grid(h, q0, n)
    y = (grid.nodes - q0) / math.sqrt(hs)
    log_norm = -0.25 * math.log(math.pi * hs) - 0.5 * (n * math.log(2.0) + special.gammaln(n + 1))
    psi = np.exp(log_norm - 0.5 * y * y) * special.eval_hermite(n, y)
    return WaveFunction1D(grid, psi.astype(complex), h, (0.0, q0), f"fock(n={n},q0={q0:g})")


def superposition(states, coefficients, label="superposition") -> WaveFunction1D:
    """Normalized linear combination of states sharing one grid and ``h``."""
    states = list(states)
    grid, h = states[0].grid, states[0].planck
    if any(s.grid != grid or s.planck != h for s in states):
        raise ParameterError("superposed states must share grid and Planck constant")
    v = sum(c * s.values for c, s in zip(coefficients, states))
    w = trapezoid_weights(grid.count, grid.spacing)
    v = v / math.sqrt(float(w @ np.abs(v) ** 2))
    return WaveFunction1D(grid, v, h, states[0].center, label)


# ---------------------------------------------------------------------------
# phase space

@dataclass(frozen=True)
class PhaseSpaceDensity:
    """``rho(p, q)`` on a tensor grid, with its analytic gradient when available."""

    pgrid: Grid1D
    qgrid: Grid1D
    values: np.ndarray
    planck: float
    grad_p: np.ndarray | None = field(default=None, repr=False)
    grad_q: np.ndarray | None = field(default=None, repr=False)
    label: str = "rho"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.pgrid.count, self.qgrid.count):
            raise ParameterError("rho values do not match the phase-space grid")
        if np.any(v < 0):
            raise ParameterError("rho must be nonnegative")

    @property
    def h_star(self) -> float:
        return _hstar(self.planck)

    def _weights(self, stride=1):
        wp = trapezoid_weights(len(self.pgrid.nodes[::stride]), self.pgrid.spacing * stride)
        wq = trapezoid_weights(len(self.qgrid.nodes[::stride]), self.qgrid.spacing * stride)
        return wp, wq

    def integrate(self, values, stride: int = 1) -> float:
        """``int values dmu_h`` (trapezoid rule, optionally on every ``stride``-th node)."""
        wp, wq = self._weights(stride)
        v = np.asarray(values, dtype=float)[::stride, ::stride]
        return float(wp @ v @ wq) / self.planck

    @property
    def mass(self) -> float:
        return self.integrate(self.values)

    def barycenter(self) -> np.ndarray:
        pp, qq = np.meshgrid(self.pgrid.nodes, self.qgrid.nodes, indexing="ij")
        return np.array([self.integrate(pp * self.values), self.integrate(qq * self.values)])

    def to_csv(self, stream=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "q", "rho"])
        for i, p in enumerate(self.pgrid.nodes):
            for j, q in enumerate(self.qgrid.nodes):
                w.writerow([format(p, ".17g"), format(q, ".17g"), format(self.values[i, j], ".17g")])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def default_phase_grids(psi: WaveFunction1D, n_extra: float = 0.0, count: int = PHASE_POINTS):
    """Square grids about the state's nominal center covering ``rho`` to below ``e^-40``."""
    hs = psi.h_star
    half = math.sqrt(2.0 * hs * (40.0 + 4.0 * n_extra))
    p0, q0 = psi.center
    return Grid1D(p0 - half, p0 + half, count), Grid1D(q0 - half, q0 + half, count)


def coherent_transform(psi: WaveFunction1D, pgrid: Grid1D | None = None,
                       qgrid: Grid1D | None = None, include_phase: bool = True,
                       tolerance: float = 1e-4) -> PhaseSpaceDensity:
    """``rho = |L psi|^2`` with its gradient ``2 Re(conj(L) grad L)``.

    ``include_phase`` toggles the factor ``e^{i p q / 2 h*}``; ``rho`` and its
    gradient do not depend on it. A normalization defect above ``tolerance``
    means the grids miss part of phase space and raises an accuracy error.
    """
    hs = psi.h_star
    if pgrid is None or qgrid is None:
        n_guess = _energy_level(psi)
        dp, dq = default_phase_grids(psi, n_guess)
        pgrid = pgrid or dp
        qgrid = qgrid or dq
    x = psi.grid.nodes
    wx = trapezoid_weights(psi.grid.count, psi.grid.spacing)
    p = pgrid.nodes
    q = qgrid.nodes
    c = (math.pi * hs) ** -0.25
    e = np.exp(1j * np.outer(p, x) / hs)                       # [p, x]
    window = np.exp(-(x[None, :] - q[:, None]) ** 2 / (2 * hs))
    g = window * (psi.values * wx)[None, :]                      # [q, x]
    amp = c * (e @ g.T)                                          # [p, q]
    amp_p = c * ((e * (1j * x / hs)[None, :]) @ g.T)
    amp_q = c * (e @ (g * (x[None, :] - q[:, None]) / hs).T)
    if include_phase:
        phase = np.exp(1j * np.outer(p, q) / (2 * hs))
        dphase_p = 1j * q[None, :] / (2 * hs)
        dphase_q = 1j * p[:, None] / (2 * hs)
        amp_p = phase * (amp_p + dphase_p * amp)
        amp_q = phase * (amp_q + dphase_q * amp)
        amp = phase * amp
    rho = np.abs(amp) ** 2
    conj = np.conj(amp)
    out = PhaseSpaceDensity(pgrid, qgrid, rho, psi.planck,
                            grad_p=2.0 * np.real(conj * amp_p),
                            grad_q=2.0 * np.real(conj * amp_q),
                            label=f"|L {psi.label}|^2")
    defect = abs(out.mass - psi.norm_squared)
    if defect > tolerance:
        raise AccuracyError(f"phase-space grid misses mass {defect:.2e}; enlarge the grids")
    return out


def _energy_level(psi: WaveFunction1D) -> float:
    """Rough oscillator level ``(<x^2> / h* - 1) / 2`` used to size default grids."""
    x = psi.grid.nodes - psi.center[1]
    w = trapezoid_weights(psi.grid.count, psi.grid.spacing)
    m2 = float(w @ (x * x * np.abs(psi.values) ** 2))
    return max(0.0, m2 / psi.h_star - 0.5)


def gaussian_profile(h: float, p0: float = 0.0, q0: float = 0.0,
                     pgrid: Grid1D | None = None, qgrid: Grid1D | None = None) -> PhaseSpaceDensity:
    """The extremal density ``exp(-pi |z - z0|^2 / h)`` in closed form."""
    hs = _hstar(h)
    half = math.sqrt(80.0 * hs)
    pgrid = pgrid or Grid1D(p0 - half, p0 + half, PHASE_POINTS)
    qgrid = qgrid or Grid1D(q0 - half, q0 + half, PHASE_POINTS)
    pp, qq = np.meshgrid(pgrid.nodes - p0, qgrid.nodes - q0, indexing="ij")
    rho = np.exp(-math.pi * (pp ** 2 + qq ** 2) / h)
    scale = -2.0 * math.pi / h
    return PhaseSpaceDensity(pgrid, qgrid, rho, h, grad_p=scale * pp * rho,
                             grad_q=scale * qq * rho, label="gaussian_profile")


# ---------------------------------------------------------------------------
# entropy, Fisher identity and the Gaussian-relative density

def _neg_rho_log_rho(rho):
    return -special.xlogy(rho, rho)


def wehrl_entropy(rho: PhaseSpaceDensity) -> FunctionalValue:
    """``S(rho) = -int rho log rho dmu_h``; the error compares against every other node."""
    integrand = _neg_rho_log_rho(rho.values)
    v = rho.integrate(integrand)
    coarse = rho.integrate(integrand, stride=2)
    return FunctionalValue(v, abs(v - coarse), "wehrl_entropy/trapezoid")


def wehrl_deficit(rho: PhaseSpaceDensity) -> FunctionalValue:
    s = wehrl_entropy(rho)
    return FunctionalValue(s.value - 1.0, s.est_error, "wehrl_deficit")


def _require_gradient(rho):
    if rho.grad_p is None or rho.grad_q is None:
        gp = np.gradient(rho.values, rho.pgrid.spacing, axis=0, edge_order=2)
        gq = np.gradient(rho.values, rho.qgrid.spacing, axis=1, edge_order=2)
        return gp, gq
    return rho.grad_p, rho.grad_q


def carlen_fisher(rho: PhaseSpaceDensity, threshold: float = RHO_THRESHOLD):
    """``(int |grad rho|^2 / rho dmu_h, excluded mass)`` over ``rho > threshold``."""
    gp, gq = _require_gradient(rho)
    keep = rho.values > threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(keep, (gp ** 2 + gq ** 2) / rho.values, 0.0)
    excluded = rho.integrate(np.where(keep, 0.0, rho.values))
    return rho.integrate(integrand), excluded


def carlen_identity_check(rho: PhaseSpaceDensity, h: float | None = None,
                          tolerance: float = 1e-2, threshold: float = RHO_THRESHOLD
                          ) -> InequalityReport:
    """``int |grad rho|^2 / rho dmu_h = 4 pi / h`` (relative discrepancy reported)."""
    h = rho.planck if h is None else h
    value, excluded = carlen_fisher(rho, threshold)
    target = 4.0 * math.pi / h
    return identity("carlen_identity", value, target, tolerance,
                    params={"state": rho.label, "h": h, "excluded_mass": excluded,
                            "threshold": threshold},
                    provenance="analytic gradient of the transform", relative_to=target)


def nu_rho(rho: PhaseSpaceDensity, h: float | None = None, check: bool = True) -> GridDensity2D:
    """``f_h(z) = e^{|z|^2/2} rho(sqrt(h*) z)`` as a density against ``gamma^2``."""
    h = rho.planck if h is None else h
    s = math.sqrt(_hstar(h))
    ga = Grid1D(rho.pgrid.lo / s, rho.pgrid.hi / s, rho.pgrid.count)
    gb = Grid1D(rho.qgrid.lo / s, rho.qgrid.hi / s, rho.qgrid.count)
    za, zb = np.meshgrid(ga.nodes, gb.nodes, indexing="ij")
    tiny = np.finfo(float).tiny
    r = np.maximum(rho.values, tiny)
    logf = 0.5 * (za ** 2 + zb ** 2) + np.log(r)
    gp, gq = _require_gradient(rho)
    grad_a = za + s * gp / r
    grad_b = zb + s * gq / r
    return GridDensity2D(ga, gb, logf, grad_a, grad_b, check=check, tol=1e-5)


def wehrl_lsi_bridge(rho: PhaseSpaceDensity, h: float | None = None,
                     tolerance: float = 2e-2) -> InequalityReport:
    """Compare ``delta_LSI(nu_rho)`` computed on the grid with ``S(rho) - 1``.

    The margin is minus ``|delta_LSI - (S - 1)| / max(S - 1, 1e-3)``. The
    barycenter relation ``b_h = b_rho / sqrt(h*)`` is recorded in ``params``.
    """
    h = rho.planck if h is None else h
    nu = nu_rho(rho, h)
    hh = entropy_2d(nu)
    ii = fisher_2d(nu)
    delta = 0.5 * ii.value - hh.value
    s = wehrl_entropy(rho)
    deficit = s.value - 1.0
    b_h = nu.barycenter()
    b_rho = rho.barycenter() / math.sqrt(_hstar(h))
    return identity("wehrl_lsi_bridge", delta, deficit, tolerance,
                    params={"state": rho.label, "h": h, "H_nu": hh.value, "I_nu": ii.value,
                            "barycenter_gap": float(np.max(np.abs(b_h - b_rho))),
                            "normalization_error": nu.normalization_error},
                    provenance="2D Simpson on the scaled phase-space grid",
                    relative_to=max(deficit, 1e-3))


def _min_hessian_eigenvalue(values, da, db, keep):
    haa = (values[2:, 1:-1] - 2 * values[1:-1, 1:-1] + values[:-2, 1:-1]) / da ** 2
    hbb = (values[1:-1, 2:] - 2 * values[1:-1, 1:-1] + values[1:-1, :-2]) / db ** 2
    hab = (values[2:, 2:] - values[2:, :-2] - values[:-2, 2:] + values[:-2, :-2]) / (4 * da * db)
    lam = 0.5 * (haa + hbb) - np.sqrt(0.25 * (haa - hbb) ** 2 + hab ** 2)
    return float(np.min(lam[keep[1:-1, 1:-1]]))


def fm_hessian_check(rho: PhaseSpaceDensity, h: float | None = None,
                     threshold: float = 1e-8) -> InequalityReport:
    """Convexity of ``psi = -log rho`` transferred to ``-Hess log f_h``.

    ``M`` is the grid minimum of the smallest eigenvalue of ``Hess psi`` over
    ``rho > threshold``. The report compares the smallest eigenvalue of
    ``-Hess log f_h``, from second differences on the scaled grid, with the
    lower bound ``M h / (2 pi) - 1``. Whether ``M > 3 pi / h`` (so that
    Bakry-Emery gives ``f_h`` a Poincare constant) is recorded as an
    annotation only; no independent 2D certification is attempted.
    """
    h = rho.planck if h is None else h
    keep = rho.values > threshold
    if not np.any(keep[1:-1, 1:-1]):
        raise AccuracyError("no grid point above the density threshold")
    tiny = np.finfo(float).tiny
    psi = -np.log(np.maximum(rho.values, tiny))
    m = _min_hessian_eigenvalue(psi, rho.pgrid.spacing, rho.qgrid.spacing, keep)
    nu = nu_rho(rho, h, check=False)
    lhs = _min_hessian_eigenvalue(-nu.logf_values, nu.grid_a.spacing, nu.grid_b.spacing, keep)
    rhs = m * h / (2.0 * math.pi) - 1.0
    return InequalityReport("fm_hessian", lhs, rhs, lhs - rhs, 1e-6 * max(1.0, abs(rhs)),
                            {"state": rho.label, "h": h, "M_grid": m,
                             "M_required": 3.0 * math.pi / h,
                             "bakry_emery_applies": bool(m > 3.0 * math.pi / h)},
                            "annotation: 2D Poincare constant not independently certified")
