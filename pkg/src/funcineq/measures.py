"""Probability measures on the line given by their density against the standard Gaussian.

A measure ``nu`` is stored through ``log f`` where ``d nu = f d gamma``. All
integrals are taken against the Lebesgue density ``p = f * phi`` on the
density's own truncation grid, which keeps every integrand bounded even when
``f`` itself grows like ``exp(c x^2)``.
"""
from __future__ import annotations

import math
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .errors import DegenerateDensityError, ParameterError
from .numerics import (
    DEFAULT_COUNT,
    LOG_SQRT_2PI,
    CDFTable,
    Grid1D,
    fd_derivative,
    integrate_grid,
    integrate_simpson_2d,
)

NORMALIZATION_TOL = 1e-8
GRID_FILE_HEADER = "# funcineq grid-density v1"


class RelativeDensity1D:
    """Density ``f = d nu / d gamma`` on the real line.

    Parameters
    ----------
    kind : str
        ``"analytic_gaussian"``, ``"exponential_tilt"`` or ``"grid"``.
    params : dict
        Family parameters (reported, and used by exact CDF formulas).
    grid : Grid1D
        Numerical support used for every integral.
    logf, dlogf : callable
        Vectorized evaluators of ``log f`` and ``(log f)'``.
    """

    def __init__(self, kind: str, params: dict, grid: Grid1D,
                 logf: Callable, dlogf: Callable, *,
                 logf_nodes=None, dlogf_nodes=None, check: bool = True,
                 label: str | None = None):
        if kind not in ("analytic_gaussian", "exponential_tilt", "grid"):
            raise ParameterError(f"unknown density kind {kind!r}")
        self.kind = kind
        self.params = dict(params)
        self.grid = grid
        self._logf = logf
        self._dlogf = dlogf
        self.label = label or _default_label(kind, self.params)
        if logf_nodes is not None:
            self.__dict__["logf_nodes"] = _frozen(logf_nodes)
        if dlogf_nodes is not None:
            self.__dict__["dlogf_nodes"] = _frozen(dlogf_nodes)
        lf = self.logf_nodes
        if lf.shape != (grid.count,) or not np.all(np.isfinite(lf)):
            raise DegenerateDensityError(f"{self.label}: log f must be finite on the truncation grid")
        if check:
            err = self.normalization_error
            if err > NORMALIZATION_TOL:
                raise DegenerateDensityError(
                    f"{self.label}: integral of f against gamma is off by {err:.3e}")

    def __repr__(self):
        return f"RelativeDensity1D({self.label}, grid=[{self.grid.lo:g}, {self.grid.hi:g}]x{self.grid.count})"

    # evaluators -----------------------------------------------------------
    def logf(self, x):
        return self._logf(np.asarray(x, dtype=float))

    def dlogf(self, x):
        return self._dlogf(np.asarray(x, dtype=float))

    def f(self, x):
        return np.exp(self.logf(x))

    def log_pdf(self, x):
        """Log of the Lebesgue density ``f * phi``."""
        x = np.asarray(x, dtype=float)
        return self.logf(x) - 0.5 * x * x - LOG_SQRT_2PI

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    # nodal data -----------------------------------------------------------
    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @cached_property
    def logf_nodes(self) -> np.ndarray:
        return _frozen(self._logf(self.nodes))

    @cached_property
    def dlogf_nodes(self) -> np.ndarray:
        return _frozen(self._dlogf(self.nodes))

    @cached_property
    def log_p_nodes(self) -> np.ndarray:
        x = self.nodes
        return _frozen(self.logf_nodes - 0.5 * x * x - LOG_SQRT_2PI)

    @cached_property
    def p_nodes(self) -> np.ndarray:
        return _frozen(np.exp(self.log_p_nodes))

    @cached_property
    def dlog_p_nodes(self) -> np.ndarray:
        return _frozen(self.dlogf_nodes - self.nodes)

    @cached_property
    def normalization_error(self) -> float:
        return abs(integrate_grid(self.p_nodes, self.grid) - 1.0)

    @cached_property
    def boundary_density(self) -> float:
        """Largest Lebesgue density value at the two truncation endpoints."""
        return float(max(self.p_nodes[0], self.p_nodes[-1]))

    @property
    def truncation_warning(self) -> str | None:
        if self.boundary_density >= 1e-16:
            return (f"{self.label}: density {self.boundary_density:.2e} at the truncation "
                    f"boundary exceeds 1e-16; consider a wider grid")
        return None

    def expect(self, values) -> float:
        """``int values * p dx`` for nodal ``values``."""
        return integrate_grid(np.asarray(values) * self.p_nodes, self.grid)

    # distribution function ------------------------------------------------
    @property
    def is_gaussian(self) -> bool:
        return self.kind in ("analytic_gaussian", "exponential_tilt")

    @property
    def _mean_var(self):
        if self.kind == "exponential_tilt":
            return self.params["b"], 1.0
        return self.params["m"], self.params["s"]

    @cached_property
    def cdf_table(self) -> CDFTable:
        return CDFTable.from_log_density(self.grid, self.log_p_nodes, self.dlog_p_nodes)

    def log_cdf(self, x):
        if self.is_gaussian:
            m, s = self._mean_var
            return special.log_ndtr((np.asarray(x, dtype=float) - m) / math.sqrt(s))
        return self.cdf_table.log_cdf(x)

    def log_sf(self, x):
        if self.is_gaussian:
            m, s = self._mean_var
            return special.log_ndtr((m - np.asarray(x, dtype=float)) / math.sqrt(s))
        return self.cdf_table.log_sf(x)

    def cdf(self, x):
        return np.exp(self.log_cdf(x))

    def sf(self, x):
        return np.exp(self.log_sf(x))

    def quantile_from_tails(self, log_lower, log_upper):
        """Quantile given both tail log-probabilities; the smaller tail is used."""
        log_lower = np.asarray(log_lower, dtype=float)
        log_upper = np.asarray(log_upper, dtype=float)
        use_lower = log_lower <= log_upper
        out = np.empty(np.broadcast(log_lower, log_upper).shape)
        if self.is_gaussian:
            m, s = self._mean_var
            r = math.sqrt(s)
            out[use_lower] = m + r * _ndtri_exp(log_lower[use_lower])
            out[~use_lower] = m - r * _ndtri_exp(log_upper[~use_lower])
            return out
        t = self.cdf_table
        out[use_lower] = t.quantile(log_prob=log_lower[use_lower])
        out[~use_lower] = t.isf(log_tail=log_upper[~use_lower])
        return out

    # alternate resolutions (error estimation) ------------------------------
    def with_grid(self, grid: Grid1D) -> "RelativeDensity1D":
        """Same density sampled on another grid (analytic families only)."""
        if self.kind == "grid":
            raise ParameterError("grid densities cannot be resampled exactly")
        return RelativeDensity1D(self.kind, self.params, grid, self._logf, self._dlogf,
                                 check=False, label=self.label)

    def companion(self) -> "RelativeDensity1D":
        """A second discretization used to estimate quadrature error."""
        if self.kind == "grid":
            if self.grid.count % 2 == 0:
                raise ParameterError("companion grid needs an odd node count")
            return RelativeDensity1D(
                "grid", self.params, self.grid.coarsened(), self._logf, self._dlogf,
                logf_nodes=self.logf_nodes[::2], dlogf_nodes=self.dlogf_nodes[::2],
                check=False, label=self.label)
        return self.with_grid(self.grid.refined())


class ProductDensity:
    """Product of one-dimensional relative densities (one per coordinate)."""

    def __init__(self, components: Sequence[RelativeDensity1D]):
        components = tuple(components)
        if not components:
            raise ParameterError("a product density needs at least one component")
        self.components = components

    @property
    def dimension(self) -> int:
        return len(self.components)

    @property
    def label(self) -> str:
        return " x ".join(c.label for c in self.components)

    def __repr__(self):
        return f"ProductDensity({self.label})"

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)


class GridDensity2D:
    """``log f`` against the two-dimensional standard Gaussian on a tensor grid."""

    def __init__(self, grid_a: Grid1D, grid_b: Grid1D, logf_values, grad_a=None, grad_b=None,
                 check: bool = True, tol: float = 1e-6):
        lf = np.asarray(logf_values, dtype=float)
        if lf.shape != (grid_a.count, grid_b.count):
            raise ParameterError("log f values do not match the tensor grid")
        self.grid_a = grid_a
        self.grid_b = grid_b
        self.logf_values = _frozen(lf)
        za, zb = np.meshgrid(grid_a.nodes, grid_b.nodes, indexing="ij")
        self.za, self.zb = za, zb
        if grad_a is None or grad_b is None:
            with np.errstate(invalid="ignore"):
                grad_a = np.gradient(lf, grid_a.spacing, axis=0, edge_order=2)
                grad_b = np.gradient(lf, grid_b.spacing, axis=1, edge_order=2)
        self.grad_a = _frozen(grad_a)
        self.grad_b = _frozen(grad_b)
        with np.errstate(under="ignore"):
            self.p_values = _frozen(np.exp(lf - 0.5 * (za**2 + zb**2) - 2 * LOG_SQRT_2PI))
        if check and self.normalization_error > tol:
            raise DegenerateDensityError(
                f"2D density integral against gamma^2 off by {self.normalization_error:.3e}")

    @cached_property
    def normalization_error(self) -> float:
        return abs(self.integrate(np.ones_like(self.p_values)) - 1.0)

    def integrate(self, values) -> float:
        """``int values * p dz`` over the tensor grid."""
        return integrate_simpson_2d(np.asarray(values) * self.p_values, self.grid_a, self.grid_b)

    def barycenter(self) -> np.ndarray:
        return np.array([self.integrate(self.za), self.integrate(self.zb)])


# ---------------------------------------------------------------------------
# constructors

def gaussian_truncation(m: float, s: float, count: int = DEFAULT_COUNT) -> Grid1D:
    half = 12.0 * math.sqrt(s)
    return Grid1D(min(-10.0, m - half), max(10.0, m + half), count)


def gaussian_relative(m: float, s: float, grid: Grid1D | None = None) -> RelativeDensity1D:
    """``N(m, s)`` as a density against ``gamma``."""
    if not s > 0:
        raise ParameterError(f"variance must be positive, got {s}")
    m, s = float(m), float(s)
    half_log_s = 0.5 * math.log(s)

    def logf(x):
        return -half_log_s + 0.5 * x * x - (x - m) ** 2 / (2 * s)

    def dlogf(x):
        return x * (1.0 - 1.0 / s) + m / s

    return RelativeDensity1D("analytic_gaussian", {"m": m, "s": s},
                             grid or gaussian_truncation(m, s), logf, dlogf)


def exponential_tilt(b: float, grid: Grid1D | None = None) -> RelativeDensity1D:
    """The extremal density ``exp(b x - b^2 / 2)`` (the law ``N(b, 1)``)."""
    b = float(b)

    def logf(x):
        return b * x - 0.5 * b * b

    def dlogf(x):
        return np.full_like(x, b, dtype=float)

    return RelativeDensity1D("exponential_tilt", {"b": b},
                             grid or gaussian_truncation(b, 1.0), logf, dlogf)


def standard_gaussian(grid: Grid1D | None = None) -> RelativeDensity1D:
    return gaussian_relative(0.0, 1.0, grid)


def from_log_values(grid: Grid1D, logf_values, dlogf_values=None, params=None,
                    label: str | None = None, check: bool = True) -> RelativeDensity1D:
    """Grid density from (already normalized) nodal values of ``log f``."""
    lf = _frozen(np.asarray(logf_values, dtype=float).copy())
    if lf.shape != (grid.count,):
        raise ParameterError(f"expected {grid.count} values, got shape {lf.shape}")
    if not np.all(np.isfinite(lf)):
        raise DegenerateDensityError("log f must be finite on the grid (f > 0 required)")
    if dlogf_values is None:
        dlf = fd_derivative(lf, grid.spacing)
    else:
        dlf = np.asarray(dlogf_values, dtype=float)
    dlf = _frozen(dlf)
    x = grid.nodes
    spline = CubicSpline(x, lf, bc_type=((1, dlf[0]), (1, dlf[-1])), extrapolate=False)
    dspline = CubicSpline(x, dlf, extrapolate=False)

    def logf(z):
        z = np.asarray(z, dtype=float)
        out = spline(np.clip(z, grid.lo, grid.hi))
        out = np.where(z < grid.lo, lf[0] + dlf[0] * (z - grid.lo), out)
        return np.where(z > grid.hi, lf[-1] + dlf[-1] * (z - grid.hi), out)

    def dlogf(z):
        z = np.asarray(z, dtype=float)
        out = dspline(np.clip(z, grid.lo, grid.hi))
        out = np.where(z < grid.lo, dlf[0], out)
        return np.where(z > grid.hi, dlf[-1], out)

    return RelativeDensity1D("grid", params or {}, grid, logf, dlogf,
                             logf_nodes=lf, dlogf_nodes=dlf, check=check, label=label)


def normalize(raw_log_density, grid: Grid1D, dlogf_values=None, params=None,
              label: str | None = None) -> RelativeDensity1D:
    """Normalize nodal values of an unnormalized ``log f`` against ``gamma``.

    Raises
    ------
    DegenerateDensityError
        If the weighted integral underflows to zero or is not finite.
    """
    lf = np.asarray(raw_log_density, dtype=float)
    if lf.shape != (grid.count,):
        raise ParameterError(f"expected {grid.count} values, got shape {lf.shape}")
    if not np.all(np.isfinite(lf)):
        raise DegenerateDensityError("raw log density must be finite (f > 0 on the grid)")
    x = grid.nodes
    log_p = lf - 0.5 * x * x - LOG_SQRT_2PI
    top = np.max(log_p)
    mass = integrate_grid(np.exp(log_p - top), grid)
    if not (mass > 0 and np.isfinite(mass)):
        raise DegenerateDensityError("density integral underflows to zero")
    log_z = top + math.log(mass)
    return from_log_values(grid, lf - log_z, dlogf_values, params=params, label=label)


def from_callable(logf: Callable, grid: Grid1D, dlogf: Callable | None = None, params=None,
                  label: str | None = None) -> RelativeDensity1D:
    x = grid.nodes
    d = None if dlogf is None else dlogf(x)
    return normalize(logf(x), grid, d, params=params, label=label)


def quartic_tilt(a: float, shift: float = 0.0, grid: Grid1D | None = None) -> RelativeDensity1D:
    """Grid density with ``log f = -a x^4 + shift * x`` (normalized)."""
    grid = grid or Grid1D(-10.0, 10.0, DEFAULT_COUNT)
    return from_callable(lambda x: -a * x**4 + shift * x, grid,
                         lambda x: -4 * a * x**3 + shift,
                         params={"a": float(a), "shift": float(shift)},
                         label=f"quartic_tilt(a={a:g},shift={shift:g})")


def double_well(depth: float = 1.0, grid: Grid1D | None = None) -> RelativeDensity1D:
    """Symmetric bimodal law with Lebesgue density proportional to ``exp(-depth (x^2-1)^2)``."""
    grid = grid or Grid1D(-10.0, 10.0, DEFAULT_COUNT)
    return from_callable(lambda x: -depth * (x * x - 1) ** 2 + 0.5 * x * x, grid,
                         lambda x: -4 * depth * x * (x * x - 1) + x,
                         params={"depth": float(depth)},
                         label=f"double_well(depth={depth:g})")


# ---------------------------------------------------------------------------
# moments and recentering

def barycenter(nu):
    """Mean of ``nu``; a vector for product densities."""
    if isinstance(nu, ProductDensity):
        return np.array([barycenter(c) for c in nu.components])
    if isinstance(nu, GridDensity2D):
        return nu.barycenter()
    return nu.expect(nu.nodes)


def variance(nu: RelativeDensity1D) -> float:
    b = barycenter(nu)
    return nu.expect((nu.nodes - b) ** 2)


def recenter(nu):
    """Barycenter-recentered density ``f(x + b) exp(-(b x + b^2 / 2))``.

    Its Lebesgue density is ``p(x + b)``, a pure translation, so grid
    densities are recentered exactly by shifting the grid.
    """
    if isinstance(nu, ProductDensity):
        return ProductDensity([recenter(c) for c in nu.components])
    b = float(barycenter(nu))
    if b == 0.0:
        return nu
    if nu.is_gaussian:
        m, s = nu._mean_var
        out = gaussian_relative(m - b, s, nu.grid.shifted(-b))
        out.label = f"recenter({nu.label})"
        return out
    grid = nu.grid.shifted(-b)
    x = grid.nodes
    lf = nu.logf_nodes - b * x - 0.5 * b * b
    dlf = nu.dlogf_nodes - b
    return from_log_values(grid, lf, dlf, params=dict(nu.params, recentered_by=b),
                           label=f"recenter({nu.label})")


# ---------------------------------------------------------------------------
# text format

def save_grid_density(nu: RelativeDensity1D, path) -> None:
    lines = [GRID_FILE_HEADER]
    lines += [f"{x:.17g}\t{v:.17g}" for x, v in zip(nu.nodes, nu.logf_nodes)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid_density(path) -> RelativeDensity1D:
    """Read the two-column ``x<TAB>log_f`` format; the result is renormalized."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != GRID_FILE_HEADER:
        raise ParameterError(f"{path}: missing header {GRID_FILE_HEADER!r}")
    rows = []
    for n, line in enumerate(text[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParameterError(f"{path}:{n}: expected two tab-separated columns")
        rows.append((float(parts[0]), float(parts[1])))
    if len(rows) < 3:
        raise ParameterError(f"{path}: need at least 3 rows")
    data = np.array(rows)
    x = data[:, 0]
    grid = Grid1D(x[0], x[-1], len(x))
    if np.max(np.abs(x - grid.nodes)) > 1e-9 * max(1.0, grid.hi - grid.lo):
        raise ParameterError(f"{path}: x column must be uniformly spaced and increasing")
    return normalize(data[:, 1], grid, label=Path(path).name)


def _ndtri_exp(log_p):
    return special.ndtri_exp(log_p)


def _frozen(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _default_label(kind, params):
    if kind == "analytic_gaussian":
        return f"N({params['m']:g},{params['s']:g})"
    if kind == "exponential_tilt":
        return f"tilt(b={params['b']:g})"
    return "grid"


__all__ = [
    "GRID_FILE_HEADER", "GridDensity2D", "ProductDensity", "RelativeDensity1D",
    "barycenter", "double_well", "exponential_tilt", "from_callable", "from_log_values",
    "gaussian_relative", "gaussian_truncation", "load_grid_density", "normalize",
    "quartic_tilt", "recenter", "save_grid_density", "standard_gaussian", "variance",
]
