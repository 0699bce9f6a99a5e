"""Entropy, Fisher information, LSI deficit and total variation relative to gamma."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import GridDensity2D, ProductDensity, RelativeDensity1D
from .numerics import LOG_SQRT_2PI, integrate_abs


@dataclass(frozen=True)
class FunctionalValue:
    """A computed functional with a two-resolution error estimate."""

    value: float
    est_error: float
    method: str

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"{self.method}: non-finite value {self.value}")
        if self.est_error < 0:
            raise ValueError("error estimate must be nonnegative")

    def __float__(self):
        return self.value

    def __add__(self, other):
        if isinstance(other, FunctionalValue):
            return FunctionalValue(self.value + other.value, self.est_error + other.est_error,
                                   self.method)
        return NotImplemented


def _with_error(fn, nu: RelativeDensity1D, method: str) -> FunctionalValue:
    value = fn(nu)
    alt = fn(nu.companion())
    return FunctionalValue(float(value), float(abs(value - alt)), method)


def _sum(values, method):
    return FunctionalValue(sum(v.value for v in values), sum(v.est_error for v in values), method)


# raw single-resolution evaluators ------------------------------------------

def _entropy(nu):
    return nu.expect(nu.logf_nodes)


def _fisher(nu):
    return nu.expect(nu.dlogf_nodes ** 2)


def _fisher_tilt(b):
    def fn(nu):
        return nu.expect((nu.dlogf_nodes - b) ** 2)
    return fn


def _total_variation(nu):
    x = nu.nodes
    p = nu.p_nodes
    phi = np.exp(-0.5 * x * x - LOG_SQRT_2PI)
    d = p * nu.dlog_p_nodes + x * phi
    return integrate_abs(p - phi, nu.grid, d)


# public API -----------------------------------------------------------------

def entropy(nu) -> FunctionalValue:
    """Relative entropy ``H(nu | gamma) = int f log f d gamma``."""
    if isinstance(nu, ProductDensity):
        return _sum([entropy(c) for c in nu], "entropy/product")
    if isinstance(nu, GridDensity2D):
        return entropy_2d(nu)
    return _with_error(_entropy, nu, "entropy/simpson")


def fisher(nu) -> FunctionalValue:
    """Fisher information ``I(nu | gamma) = int |(log f)'|^2 d nu``."""
    if isinstance(nu, ProductDensity):
        return _sum([fisher(c) for c in nu], "fisher/product")
    if isinstance(nu, GridDensity2D):
        return fisher_2d(nu)
    return _with_error(_fisher, nu, "fisher/simpson")


def lsi_deficit(nu) -> FunctionalValue:
    """``I / 2 - H``; nonnegative by the Gaussian log-Sobolev inequality."""
    h = entropy(nu)
    i = fisher(nu)
    return FunctionalValue(0.5 * i.value - h.value, 0.5 * i.est_error + h.est_error, "lsi_deficit")


def total_variation(nu: RelativeDensity1D) -> FunctionalValue:
    """``int |f - 1| d gamma`` (takes values in ``[0, 2]``)."""
    if isinstance(nu, ProductDensity):
        raise TypeError("total variation is implemented for one-dimensional densities")
    v = _with_error(_total_variation, nu, "total_variation/hermite-abs")
    return FunctionalValue(min(max(v.value, 0.0), 2.0), v.est_error, v.method)


def fisher_to_tilt(nu: RelativeDensity1D, b: float) -> FunctionalValue:
    """``int |(log f)' - b|^2 d nu``: Fisher information of ``nu`` relative to ``N(b, 1)``."""
    return _with_error(_fisher_tilt(float(b)), nu, "fisher_to_tilt/simpson")


def entropy_2d(nu: GridDensity2D) -> FunctionalValue:
    v = nu.integrate(nu.logf_values)
    return FunctionalValue(v, _coarse_gap(nu, nu.logf_values, v), "entropy/simpson2d")


def fisher_2d(nu: GridDensity2D) -> FunctionalValue:
    g2 = nu.grad_a ** 2 + nu.grad_b ** 2
    v = nu.integrate(g2)
    return FunctionalValue(v, _coarse_gap(nu, g2, v), "fisher/simpson2d")


def _coarse_gap(nu: GridDensity2D, values, fine):
    """Error estimate from the same integrand on every other node."""
    from .numerics import integrate_simpson_2d
    ga, gb = nu.grid_a, nu.grid_b
    if ga.count % 2 == 0 or gb.count % 2 == 0:
        return 0.0
    coarse = integrate_simpson_2d((values * nu.p_values)[::2, ::2], ga.coarsened(), gb.coarsened())
    return float(abs(coarse - fine))
