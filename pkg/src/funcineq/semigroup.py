"""Ornstein-Uhlenbeck and one-dimensional Fokker-Planck flows.

The OU flow is evaluated exactly in time through the Mehler formula with
Gauss-Hermite quadrature. Drift-diffusion flows toward ``mu = e^{-V} / Z``
use an implicit Euler finite-volume scheme for ``u = d nu / d mu``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import AccuracyError, ParameterError, PreconditionError, TruncationError
from .functionals import entropy, fisher
from .measures import RelativeDensity1D, barycenter, from_log_values
from .numerics import (
    LOG_SQRT_2PI,
    Grid1D,
    fd_derivative,
    gauss_hermite_rule,
    integrate_grid,
    logsumexp_rows,
    simpson_weights,
    trapezoid_weights,
)
from .report import InequalityReport, identity, upper_bound

MEHLER_ORDER = 120
MEHLER_CHECK_ORDER = 80
MEHLER_MAX_ORDER = 200
MEHLER_TOL = 1e-6
MEHLER_GRID_WIDTH = 20.0
FP_MASS_TOL = 1e-6
FP_GRID = Grid1D(-10.0, 10.0, 2001)


# ---------------------------------------------------------------------------
# flow state

@dataclass
class FlowSample:
    t: float
    H: float
    I: float
    lambda_cert: float | None = None


@dataclass
class FlowState:
    """A density at time ``t`` with the ``(t, H, I)`` trace recorded so far.

    For Fokker-Planck flows ``H`` and ``I`` are taken relative to the
    invariant measure of the potential; for the OU flow that measure is
    ``gamma``.
    """

    t: float
    density: RelativeDensity1D
    trace: list = field(default_factory=list)
    reference: str = "gamma"

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.trace])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([s.H for s in self.trace])

    @property
    def fishers(self) -> np.ndarray:
        return np.array([s.I for s in self.trace])

    def is_monotone(self, tol: float = 1e-8) -> bool:
        """Entropy and Fisher information nonincreasing along the trace."""
        return bool(np.all(np.diff(self.entropies) <= tol) and np.all(np.diff(self.fishers) <= tol))

    def to_csv(self, stream=None) -> str:
        """Write ``t,H,I,lambda_cert`` rows; returns the text as well."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "H", "I", "lambda_cert"])
        for s in self.trace:
            w.writerow([_fmt(s.t), _fmt(s.H), _fmt(s.I),
                        "" if s.lambda_cert is None else _fmt(s.lambda_cert)])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def _fmt(v):
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# potentials

@dataclass(frozen=True)
class Potential1D:
    """``V`` with derivatives and a convexity floor ``eta`` (``V'' >= eta``)."""

    name: str
    V: Callable
    dV: Callable
    d2V: Callable
    eta: float
    even: bool = True

    def check_floor(self, grid: Grid1D, tol: float = 1e-12) -> bool:
        return bool(np.all(self.d2V(grid.nodes) >= self.eta - tol))

    def is_even(self, grid: Grid1D, tol: float = 1e-8) -> bool:
        x = grid.nodes
        return bool(np.max(np.abs(self.V(x) - self.V(-x))) <= tol)

    @property
    def is_quadratic(self) -> bool:
        return self.name == "quadratic"

    def reference_density(self, grid: Grid1D) -> RelativeDensity1D:
        """``mu = e^{-V} / Z`` written relative to ``gamma`` on ``grid``."""
        x = grid.nodes
        raw = -self.V(x) + 0.5 * x * x
        draw = -self.dV(x) + x
        return _normalized(grid, raw, draw, label=f"mu[{self.name}]")


def quadratic_potential() -> Potential1D:
    return Potential1D("quadratic", lambda x: 0.5 * np.asarray(x) ** 2, lambda x: np.asarray(x, float),
                       lambda x: np.ones_like(np.asarray(x, float)), 1.0)


def quartic_potential() -> Potential1D:
    """``x^2/2 + x^4/4`` with floor ``eta = 1``."""
    return Potential1D("quartic",
                       lambda x: 0.5 * np.asarray(x) ** 2 + 0.25 * np.asarray(x) ** 4,
                       lambda x: np.asarray(x) + np.asarray(x) ** 3,
                       lambda x: 1.0 + 3.0 * np.asarray(x) ** 2, 1.0)


def double_well_potential() -> Potential1D:
    """``(x^2 - 1)^2``; not convex (``eta = -4``), usable for flows only."""
    return Potential1D("double_well",
                       lambda x: (np.asarray(x) ** 2 - 1.0) ** 2,
                       lambda x: 4.0 * np.asarray(x) * (np.asarray(x) ** 2 - 1.0),
                       lambda x: 12.0 * np.asarray(x) ** 2 - 4.0, -4.0)


POTENTIALS = {
    "quadratic": quadratic_potential,
    "quartic": quartic_potential,
    "double_well": double_well_potential,
}


def _normalized(grid, raw_logf, dlogf, label):
    x = grid.nodes
    lp = raw_logf - 0.5 * x * x
    top = np.max(lp)
    z = integrate_grid(np.exp(lp - top), grid)
    if not z > 0:
        raise TruncationError(f"{label}: density underflows on the grid")
    logf = raw_logf - top - math.log(z) + LOG_SQRT_2PI
    return from_log_values(grid, logf, dlogf, params={}, label=label)


def even_tilt(potential: Potential1D, strength: float = 0.25,
              grid: Grid1D | None = None) -> RelativeDensity1D:
    """``nu`` proportional to ``e^{-strength x^2} mu`` with ``mu = e^{-V}``: even, not Gaussian."""
    grid = grid or FP_GRID
    x = grid.nodes
    raw = -potential.V(x) + (0.5 - strength) * x * x
    draw = -potential.dV(x) + (1.0 - 2.0 * strength) * x
    out = _normalized(grid, raw, draw, label=f"even_tilt[{potential.name},{strength:g}]")
    out.params = {"potential": potential.name, "strength": float(strength)}
    return out


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck flow

def lambda_t(lam: float, t: float, eta: float = 1.0) -> float:
    """Poincare constant carried along the flow: ``1/(e^{-2 eta t}/lam + (1 - e^{-2 eta t})/eta)``."""
    if lam <= 0 or eta <= 0:
        raise ParameterError("lambda and eta must be positive")
    if t < 0:
        raise ParameterError("time must be nonnegative")
    e = math.exp(-2.0 * eta * t)
    return 1.0 / (e / lam + (1.0 - e) / eta)


def _mehler(nu, x, t, order):
    rule = gauss_hermite_rule(order)
    a = math.exp(-t)
    b = math.sqrt(-math.expm1(-2.0 * t))
    z = a * x[:, None] + b * rule.nodes[None, :]
    lf = nu.logf(z)
    lse, soft = logsumexp_rows(lf, rule.weights)
    dlf = a * np.sum(soft * nu.dlogf(z), axis=1)
    return lse, dlf


def _mehler_on_grid(nu, x, t, stride=1, block=512):
    """Mehler integral as quadrature over the density's own nodes.

    ``P_t f(x) = int f(z) phi((z - a x) / b) dz / b`` with Simpson weights on
    every ``stride``-th node; rows are processed in blocks to bound memory.
    """
    a = math.exp(-t)
    b = math.sqrt(-math.expm1(-2.0 * t))
    z = nu.nodes[::stride]
    lfz = nu.logf_nodes[::stride]
    dlfz = nu.dlogf_nodes[::stride]
    w = simpson_weights(len(z), nu.grid.spacing * stride)
    lse = np.empty(len(x))
    dlf = np.empty(len(x))
    shift = -math.log(b) - LOG_SQRT_2PI
    for i in range(0, len(x), block):
        xs = x[i:i + block]
        terms = lfz[None, :] - (z[None, :] - a * xs[:, None]) ** 2 / (2 * b * b) + shift
        lse[i:i + block], soft = logsumexp_rows(terms, w)
        dlf[i:i + block] = a * (soft @ dlfz)
    return lse, dlf


def ou_density(nu: RelativeDensity1D, t: float, order: int = MEHLER_ORDER,
               check_order: int | None = MEHLER_CHECK_ORDER):
    """``P_t f`` relative to ``gamma``; returns ``(density, est_error)``.

    ``est_error`` is ``int |P_t f - P_t^{(check)} f| d gamma`` between the
    two quadrature orders. When it exceeds ``MEHLER_TOL`` the computation is
    repeated once at order ``MEHLER_MAX_ORDER`` (checked against ``order``);
    if that still fails an accuracy error is raised.
    """
    if t < 0:
        raise ParameterError("time must be nonnegative")
    if t == 0:
        return nu, 0.0
    x = nu.nodes
    lf, dlf = _mehler(nu, x, t, order)
    err = 0.0
    if check_order:
        err = _mehler_gap(nu, x, lf, _mehler(nu, x, t, check_order)[0])
        if err > MEHLER_TOL and order < MEHLER_MAX_ORDER:
            lf_hi, dlf_hi = _mehler(nu, x, t, MEHLER_MAX_ORDER)
            err = _mehler_gap(nu, x, lf_hi, lf)
            lf, dlf = lf_hi, dlf_hi
        if err > MEHLER_TOL and math.sqrt(-math.expm1(-2.0 * t)) > MEHLER_GRID_WIDTH * nu.grid.spacing:
            # the kernel is wide compared with the grid: integrate on the nodes
            lf_g, dlf_g = _mehler_on_grid(nu, x, t)
            err = _mehler_gap(nu, x, lf_g, _mehler_on_grid(nu, x, t, stride=2)[0])
            lf, dlf = lf_g, dlf_g
        if err > MEHLER_TOL:
            raise AccuracyError(f"Mehler quadrature self-check {err:.3g} exceeds {MEHLER_TOL}")
    out = from_log_values(nu.grid, lf, dlf, params=dict(nu.params, ou_time=t),
                          label=f"P_{t:g}[{nu.label}]")
    return out, err


def _mehler_gap(nu, x, lf_a, lf_b):
    g = -0.5 * x * x - LOG_SQRT_2PI
    return integrate_grid(np.abs(np.exp(lf_a + g) - np.exp(lf_b + g)), nu.grid)


def ou_evolve(nu: RelativeDensity1D, t: float, times: Sequence[float] | None = None,
              certify_lambda: bool = False) -> FlowState:
    """Evolve ``nu`` by the OU semigroup to time ``t``.

    The trace holds ``(t, H, I)`` at ``0``, at every entry of ``times`` below
    ``t`` and at ``t``. With ``certify_lambda`` each sample also carries the
    spectral-gap certificate of the evolved measure.
    """
    grid_times = sorted({0.0, float(t), *(float(s) for s in (() if times is None else times) if 0 < s < t)})
    trace = []
    density = nu
    for s in grid_times:
        density, _ = ou_density(nu, s)
        trace.append(_sample(density, s, certify_lambda))
    return FlowState(float(t), density, trace)


def _sample(density, t, certify_lambda, h_i=None):
    if h_i is None:
        h_i = (entropy(density).value, fisher(density).value)
    lam = None
    if certify_lambda:
        from .poincare import spectral_gap_oracle
        lam = spectral_gap_oracle(density)
    return FlowSample(float(t), float(h_i[0]), float(h_i[1]), lam)


def _debruijn_times(t_max, steps):
    """Simpson nodes on geometrically graded segments ``[0, t_max 2^-K], ..., [t_max/2, t_max]``."""
    segments = 6
    per = max(2, int(math.ceil(steps / segments)))
    per += per % 2
    edges = [0.0] + [t_max * 2.0 ** (k - segments + 1) for k in range(segments)]
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s = np.linspace(a, b, per + 1)
        w = np.ones(per + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= (b - a) / (3.0 * per)
        nodes.append(s)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def de_bruijn_check(nu: RelativeDensity1D, t_max: float = 8.0, steps: int = 96,
                    tolerance: float = 1e-3) -> InequalityReport:
    """Compare ``H(nu)`` with ``int_0^t_max I(nu_t) dt`` plus the tail ``I(nu_t_max) / 2``.

    The tail uses the contraction ``I(nu_t) <= I(nu_T) e^{-2(t - T)}``. The
    report margin is minus the relative discrepancy.
    """
    if steps < 32:
        raise ParameterError("de Bruijn check needs at least 32 time steps")
    if t_max <= 0:
        raise ParameterError("t_max must be positive")
    ts, ws = _debruijn_times(t_max, steps)
    cache = {}
    vals = np.empty(len(ts))
    for j, s in enumerate(ts):
        if s not in cache:
            cache[s] = fisher(ou_density(nu, float(s))[0]).value
        vals[j] = cache[s]
    integral = float(ws @ vals)
    tail = 0.5 * cache[ts[-1]]
    h = entropy(nu)
    rhs = integral + tail
    scale = max(abs(h.value), 1e-12)
    return identity("de_bruijn", h.value, rhs, tolerance,
                    params={"density": nu.label, "t_max": t_max, "steps": int(len(ts)),
                            "integral": integral, "tail": tail},
                    provenance=f"graded Simpson in t; H est_error {h.est_error:.2g}",
                    relative_to=scale)


def fisher_decay_check(nu: RelativeDensity1D, lam: float, times=(0.1, 0.5, 1.0, 2.0),
                       tolerance: float = 1e-6, centering_tol: float = 1e-6) -> InequalityReport:
    """``I(nu_t) <= I(nu) e^{-4t} lambda_t / lambda`` at each sample time (worst margin reported)."""
    b = float(barycenter(nu))
    if abs(b) > centering_tol:
        raise PreconditionError(f"Fisher decay needs a centered measure, barycenter {b:.3g}")
    i0 = fisher(nu).value
    lhs, rhs = [], []
    for t in times:
        it = fisher(ou_density(nu, float(t))[0]).value
        lhs.append(it)
        rhs.append(i0 * math.exp(-4.0 * t) * lambda_t(lam, t) / lam)
    margins = [r - l for l, r in zip(lhs, rhs)]
    k = int(np.argmin(margins))
    return InequalityReport("fisher_decay", lhs[k], rhs[k], margins[k], tolerance,
                            {"density": nu.label, "lambda": lam, "times": tuple(times),
                             "worst_t": times[k], "margins": tuple(margins)},
                            "Mehler quadrature")


# ---------------------------------------------------------------------------
# Fokker-Planck flow

def _fp_coefficients(v, h, dt):
    """Tridiagonal implicit-Euler matrix of the no-flux finite-volume scheme.

    The scheme is ``m_i u_i' = [m_{i+1/2}(u_{i+1} - u_i) - m_{i-1/2}(u_i - u_{i-1})] / h^2``
    for ``u = d nu / d mu``, ``m = e^{-V}`` and ``m_{i+1/2} = sqrt(m_i m_{i+1})``,
    with half-width boundary cells. It is stepped in the variable
    ``rho_i = m_i u_i`` (the Lebesgue density), where the coefficients become
    ``exp(+-(V_{i+1} - V_i) / 2)`` and stay representable even when ``u``
    spans thousands of orders of magnitude. Columns of the matrix sum to one,
    so the trapezoid mass ``sum w_i rho_i`` is conserved exactly.
    """
    half = 0.5 * np.diff(v)
    n = len(v)
    a_up = np.exp(half)       # coefficient of rho_{i+1} in the flux through i+1/2
    a_dn = np.exp(-half)      # coefficient of rho_i in the same flux
    k = dt / (h * h)
    upper = -k * a_up
    lower = -k * a_dn
    diag = np.ones(n)
    diag[:-1] += k * a_dn
    diag[1:] += k * a_up
    # half cells at the ends double the flux-to-volume ratio
    upper[0] *= 2.0
    diag[0] = 1.0 + 2.0 * k * a_dn[0]
    lower[-1] *= 2.0
    diag[-1] = 1.0 + 2.0 * k * a_up[-1]
    return lower, diag, upper


class _FPSolver:
    def __init__(self, potential: Potential1D, grid: Grid1D, dt: float | None):
        self.potential = potential
        self.grid = grid
        h = grid.spacing
        self.dt = dt if dt is not None else min(1e-3, h * h)
        self.v = potential.V(grid.nodes)
        self.mu = potential.reference_density(grid)
        self.w = trapezoid_weights(grid.count, h)
        self.lower, self.diag, self.upper = _fp_coefficients(self.v, h, self.dt)

    def mass(self, rho):
        return float(self.w @ rho)

    def advance(self, rho, nsteps):
        if nsteps <= 0:
            return rho
        return kernels.implicit_diffusion_steps(self.lower, self.diag, self.upper,
                                                np.ascontiguousarray(rho), int(nsteps))

    def state(self, log_scale, rho, t, certify_lambda):
        x = self.grid.nodes
        tiny = np.finfo(float).tiny
        # nodes where rho underflowed carry no mass; flooring keeps log finite
        log_rho = np.log(np.maximum(rho, tiny)) + log_scale
        dlog_rho = fd_derivative(log_rho, self.grid.spacing)
        logf = log_rho + 0.5 * x * x
        dlogf = dlog_rho + x
        dens = _normalized(self.grid, logf, dlogf, label=f"FP_{t:g}")
        # H and I relative to mu
        log_u = dens.logf_nodes - self.mu.logf_nodes
        dlog_u = dens.dlogf_nodes - self.mu.dlogf_nodes
        h_i = (dens.expect(log_u), dens.expect(dlog_u ** 2))
        return dens, _sample(dens, t, certify_lambda, h_i)


def fp_evolve(potential: Potential1D, nu: RelativeDensity1D, t: float,
              times: Sequence[float] | None = None, grid: Grid1D | None = None,
              dt: float | None = None, certify_lambda: bool = False) -> FlowState:
    """Evolve ``nu`` by ``d_t u = u'' - V' u'`` for ``u = d nu / d mu``.

    ``nu`` is given relative to ``gamma`` and is resampled on ``grid``
    (default 2001 nodes on [-10, 10]). The returned density is again relative
    to ``gamma``; the trace records ``H(nu_t | mu)`` and ``I(nu_t | mu)``.
    Time steps default to ``min(1e-3, h^2)``.
    """
    if t < 0:
        raise ParameterError("time must be nonnegative")
    grid = grid or FP_GRID
    solver = _FPSolver(potential, grid, dt)
    log_p = nu.log_pdf(grid.nodes)
    if not np.all(np.isfinite(log_p)):
        raise TruncationError("initial density is not finite on the flow grid")
    log_scale = float(np.max(log_p))
    rho = np.exp(log_p - log_scale)
    m0 = solver.mass(rho)
    extra = () if times is None else times
    sample_times = sorted({0.0, float(t), *(float(s) for s in extra if 0 < s < t)})
    trace = []
    current = 0.0
    dens = None
    for s in sample_times:
        nsteps = int(round((s - current) / solver.dt))
        rho = solver.advance(rho, nsteps)
        current += nsteps * solver.dt
        drift = abs(solver.mass(rho) - m0) / m0
        if drift > FP_MASS_TOL:
            raise AccuracyError(f"Fokker-Planck mass drift {drift:.3g} exceeds {FP_MASS_TOL}")
        dens, sample = solver.state(log_scale, rho, s, certify_lambda)
        trace.append(sample)
    return FlowState(float(t), dens, trace, reference=f"mu[{potential.name}]")


# ---------------------------------------------------------------------------
# Bakry-Emery improvement

def be_constant(eta: float, lam: float) -> float:
    """``(eta - lam - lam log(eta/lam)) / (2 (eta - lam)^2)``, equal to ``1/(4 eta)`` at ``lam = eta``."""
    if eta <= 0 or lam <= 0:
        raise ParameterError("eta and lambda must be positive")
    d = eta - lam
    if abs(d) < 1e-4 * eta:
        # series in e = (eta - lam) / eta: sum_k e^k / ((k + 1)(k + 2)), over 2 eta
        e = d / eta
        series = sum(e ** k / ((k + 2) * (k + 1)) for k in range(12))
        return series / (2.0 * eta)
    return (d - lam * math.log(eta / lam)) / (2.0 * d * d)


def _check_even(nu: RelativeDensity1D, tol=1e-8):
    x = nu.nodes
    x = x[np.abs(x) <= min(abs(nu.grid.lo), abs(nu.grid.hi))]
    return float(np.max(np.abs(nu.log_pdf(x) - nu.log_pdf(-x)))) <= tol * max(1.0, float(np.max(np.abs(nu.log_pdf(x)))))


def relative_functionals(potential: Potential1D, nu: RelativeDensity1D):
    """``(H(nu|mu), I(nu|mu))`` evaluated on the grid of ``nu``."""
    mu = potential.reference_density(nu.grid)
    log_u = nu.logf_nodes - mu.logf_nodes
    dlog_u = nu.dlogf_nodes - mu.dlogf_nodes
    return nu.expect(log_u), nu.expect(dlog_u ** 2)


def be_check(potential: Potential1D, eta: float, nu: RelativeDensity1D, lam: float,
             times=(0.1, 0.5, 1.0, 2.0), tolerance: float = 1e-6) -> list:
    """Improved Bakry-Emery bounds for even ``V`` and even ``nu``.

    Returns two reports: ``be_entropy`` for
    ``H(nu|mu) <= be_constant(eta, lam) I(nu|mu)`` and ``be_fisher_decay`` for
    ``I(nu_t|mu) <= e^{-4 eta t} (lambda_t / lambda) I(nu|mu)`` at the worst
    sample time. The quadratic potential is evolved by the exact OU flow,
    other potentials by ``fp_evolve``.
    """
    if eta <= 0:
        raise PreconditionError("Bakry-Emery needs a positive convexity floor")
    if not potential.check_floor(nu.grid):
        raise PreconditionError(f"V'' >= {eta} fails on the grid for {potential.name}")
    if potential.eta < eta:
        raise PreconditionError("requested eta exceeds the potential's convexity floor")
    if not potential.is_even(nu.grid):
        raise PreconditionError("potential is not even")
    if not _check_even(nu):
        raise PreconditionError("density is not even")
    h, i = relative_functionals(potential, nu)
    k = be_constant(eta, lam)
    params = {"potential": potential.name, "density": nu.label, "eta": eta, "lambda": lam}
    entropy_report = upper_bound("be_entropy", h, k * i, tolerance,
                                 params=dict(params, constant=k))
    if potential.is_quadratic and eta == 1.0:
        flow = ou_evolve(nu, max(times), times=times)
        method = "Mehler quadrature"
    else:
        flow = fp_evolve(potential, nu, max(times), times=times)
        method = "implicit finite volume"
        # the flow grid differs from the input grid; use its own t=0 value
        i = flow.trace[0].I
    lhs, rhs = [], []
    for s in flow.trace[1:]:
        lhs.append(s.I)
        rhs.append(math.exp(-4.0 * eta * s.t) * lambda_t(lam, s.t, eta) / lam * i)
    margins = [r - l for l, r in zip(lhs, rhs)]
    j = int(np.argmin(margins))
    decay_report = InequalityReport(
        "be_fisher_decay", lhs[j], rhs[j], margins[j], tolerance,
        dict(params, worst_t=flow.trace[j + 1].t, times=tuple(times), margins=tuple(margins)),
        method)
    return [entropy_report, decay_report]
