"""Poincare constants of one-dimensional measures.

Two independent routes: the median-based Muckenhoupt quantities ``A+``,
``A-`` (which pin the optimal constant down to a factor of 8), and the
spectral gap of a finite-difference discretization of ``-(1/p)(p u')'`` with
no-flux boundaries. The spectral value is the one other modules rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import AccuracyError, DegenerateDensityError, ParameterError
from .measures import RelativeDensity1D
from .numerics import _log_cell_masses, trapezoid_weights

TRIM_LOG_RANGE = 200.0


@dataclass(frozen=True)
class PoincareCertificate:
    """Spectral gap together with the Muckenhoupt cross-check.

    ``consistent_direct`` tests ``B/2 <= lambda <= 4B`` and
    ``consistent_inverse`` tests ``B/2 <= 1/lambda <= 4B`` with
    ``B = max(A+, A-)``.
    """

    lambda_spectral: float
    est_error: float
    a_plus: float
    a_minus: float
    bound_interval: tuple
    median: float
    consistent_direct: bool
    consistent_inverse: bool

    @property
    def reading(self) -> str:
        if self.consistent_direct and self.consistent_inverse:
            return "both"
        if self.consistent_inverse:
            return "inverse"
        if self.consistent_direct:
            return "direct"
        return "none"


# ---------------------------------------------------------------------------
# spectral oracle

def _gap_on_nodes(log_p, h):
    """Second eigenvalue of the symmetrized no-flux finite-difference operator.

    With ``p_{i+1/2} = sqrt(p_i p_{i+1})`` the symmetrized off-diagonal is
    ``-1 / (h sqrt(w_i w_{i+1}))`` and the diagonal only involves ratios of
    neighbouring densities, so nothing under- or overflows in the tails.
    """
    n = len(log_p)
    w = trapezoid_weights(n, h) / h
    half = 0.5 * np.diff(log_p)
    diag = np.zeros(n)
    diag[:-1] += np.exp(half)          # p_{i+1/2} / p_i
    diag[1:] += np.exp(-half)          # p_{i-1/2} / p_i
    diag /= h * h * w
    off = -1.0 / (h * h * np.sqrt(w[:-1] * w[1:]))
    try:
        vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 1))
    except (LinAlgError, ValueError) as exc:
        raise AccuracyError(f"tridiagonal eigen-solver failed: {exc}") from exc
    return float(vals[1])


def spectral_gap_details(nu: RelativeDensity1D):
    """``(lambda, est_error, lambda_fine)`` for the spectral gap of ``nu``.

    The discretization error is second order in the spacing, so the grid
    value and the every-other-node value are Richardson-extrapolated; the
    reported error is the size of that correction.
    """
    if nu.grid.count % 2 == 0:
        raise ParameterError("spectral oracle needs an odd node count")
    lp = nu.log_p_nodes
    if not np.all(np.isfinite(lp)):
        raise DegenerateDensityError("log-density is not finite on the grid")
    h = nu.grid.spacing
    # drop the far tails (relative mass below e^-TRIM_LOG_RANGE): they only
    # add huge, irrelevant diagonal entries that spoil the conditioning
    keep = np.nonzero(lp >= lp.max() - TRIM_LOG_RANGE)[0]
    i0 = keep[0] - keep[0] % 2
    i1 = keep[-1] + keep[-1] % 2
    lp = lp[i0:i1 + 1]
    if len(lp) < 7:
        raise DegenerateDensityError("density is resolved by too few grid nodes")
    fine = _gap_on_nodes(lp, h)
    coarse = _gap_on_nodes(lp[::2], 2 * h)
    rich = (4 * fine - coarse) / 3
    if not rich > 0:
        raise AccuracyError(f"nonpositive spectral gap {rich}")
    return rich, abs(rich - fine), fine


def spectral_gap_oracle(nu: RelativeDensity1D) -> float:
    """Best constant in ``lambda Var_nu(g) <= int g'^2 d nu`` (discretized)."""
    return spectral_gap_details(nu)[0]


def poincare_gap(nu: RelativeDensity1D, lam: float, g, dg) -> float:
    """``int g'^2 d nu - lam Var_nu(g)`` for nodal values of ``g`` and ``g'``."""
    g = np.asarray(g, dtype=float)
    mean = nu.expect(g)
    return nu.expect(np.asarray(dg, dtype=float) ** 2) - lam * nu.expect((g - mean) ** 2)


# ---------------------------------------------------------------------------
# Muckenhoupt quantities

def _log_cumulative_inverse(log_p, dlog_p, h):
    """``log int_{x_0}^{x_i} dt / p(t)`` for every node (first entry ``-inf``)."""
    cells = _log_cell_masses(-log_p, -dlog_p, h)
    return np.concatenate([[-np.inf], np.logaddexp.accumulate(cells)])


def muckenhoupt(nu: RelativeDensity1D):
    """``(a_plus, a_minus, median)``.

    ``A+ = sup_{x >= m} nu([x, inf)) int_m^x dt/p`` and
    ``A- = sup_{x <= m} nu((-inf, x]) int_x^m dt/p`` over grid nodes, with the
    median ``m`` rounded to the nearest node.
    """
    lp = nu.log_p_nodes
    dlp = nu.dlog_p_nodes
    if not np.all(np.isfinite(lp)):
        raise DegenerateDensityError("density underflows in the bulk")
    h = nu.grid.spacing
    x = nu.nodes
    median = float(nu.quantile_from_tails(math.log(0.5), math.log(0.5)))
    k = int(np.clip(np.rint((median - nu.grid.lo) / h), 0, nu.grid.count - 1))
    log_s = nu.log_sf(x)
    log_f = nu.log_cdf(x)
    right = _log_cumulative_inverse(lp[k:], dlp[k:], h)
    left = _log_cumulative_inverse(lp[:k + 1][::-1], -dlp[:k + 1][::-1], h)[::-1]
    a_plus = float(np.exp(np.max(log_s[k:] + right)))
    a_minus = float(np.exp(np.max(log_f[:k + 1] + left)))
    return a_plus, a_minus, median


def certify(nu: RelativeDensity1D) -> PoincareCertificate:
    lam, err, _ = spectral_gap_details(nu)
    a_plus, a_minus, median = muckenhoupt(nu)
    b = max(a_plus, a_minus)
    lo, hi = 0.5 * b, 4.0 * b
    return PoincareCertificate(
        lambda_spectral=lam, est_error=err, a_plus=a_plus, a_minus=a_minus,
        bound_interval=(lo, hi), median=median,
        consistent_direct=bool(lo <= lam <= hi),
        consistent_inverse=bool(lo <= 1.0 / lam <= hi),
    )
