"""Optimal transport on the line and for product measures.

The monotone rearrangement ``T = G^{-1} o F`` is evaluated by composing the
source log-CDF (or log-survival function, whichever tail is smaller) with the
target quantile, so both far tails keep full relative precision. ``T'`` comes
from the density ratio ``p_source(x) / p_target(T(x))`` rather than from
differencing ``T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from . import kernels
from .errors import MapError, ParameterError, SizeError, TruncationError
from .functionals import FunctionalValue, entropy
from .measures import ProductDensity, RelativeDensity1D, standard_gaussian
from .numerics import Grid1D, integrate_abs

DEFAULT_TAL_CONSTANT = 1.0 / 288.0
MAX_ORACLE_ATOMS = 8
_LOG2 = math.log(2.0)


class TransportMap1D:
    """Monotone map pushing ``source`` onto ``target``, tabulated on the source grid.

    Parameters
    ----------
    source, target : RelativeDensity1D
    """

    def __init__(self, source: RelativeDensity1D, target: RelativeDensity1D):
        self.source = source
        self.target = target
        x = source.nodes
        t = self(x)
        if not np.all(np.isfinite(t)):
            raise TruncationError("quantile composition produced non-finite values; "
                                  "the source tails underflow")
        if np.any(np.diff(t) <= 0):
            raise TruncationError("tabulated map is not strictly increasing")
        self.x = x
        self.t_values = t
        self.log_dt_values = self._log_derivative(x, t)
        if not np.all(np.isfinite(self.log_dt_values)):
            raise MapError("T' is not positive and finite on the table")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.target.quantile_from_tails(self.source.log_cdf(x), self.source.log_sf(x))

    def _log_derivative(self, x, t):
        return self.source.log_pdf(x) - self.target.log_pdf(t)

    def derivative(self, x):
        """``T'(x)`` from the Monge-Ampere relation."""
        x = np.asarray(x, dtype=float)
        return np.exp(self._log_derivative(x, self(x)))

    @property
    def dt_values(self) -> np.ndarray:
        return np.exp(self.log_dt_values)

    @property
    def table(self) -> np.ndarray:
        """``(x, T(x))`` pairs at the source grid nodes."""
        return np.column_stack([self.x, self.t_values])

    def pushforward_error(self, x=None) -> float:
        """``max |F_target(T(x)) - F_source(x)|`` over ``x`` (default: table nodes)."""
        if x is None:
            x, t = self.x, self.t_values
        else:
            x = np.asarray(x, dtype=float)
            t = self(x)
        lower = np.abs(self.target.cdf(t) - self.source.cdf(x))
        upper = np.abs(self.target.sf(t) - self.source.sf(x))
        return float(np.max(np.minimum(lower, upper)))


def monotone_map(nu: RelativeDensity1D, mu: RelativeDensity1D | None = None) -> TransportMap1D:
    """Monotone rearrangement from ``nu`` to ``mu`` (default: the standard Gaussian)."""
    return TransportMap1D(nu, mu if mu is not None else standard_gaussian())


def _with_companion(fn, nu, mu, method):
    value = fn(nu, mu)
    alt = fn(nu.companion(), mu)
    return FunctionalValue(float(value), float(abs(value - alt)), method)


# ---------------------------------------------------------------------------
# Wasserstein distances

def _w2_squared(nu, mu):
    tmap = monotone_map(nu, mu)
    return nu.expect((tmap.x - tmap.t_values) ** 2)


def w2_squared_1d(nu: RelativeDensity1D, mu: RelativeDensity1D | None = None) -> FunctionalValue:
    mu = mu if mu is not None else standard_gaussian()
    return _with_companion(_w2_squared, nu, mu, "w2_squared/monotone")


def w2_1d(nu: RelativeDensity1D, mu: RelativeDensity1D | None = None) -> FunctionalValue:
    """Quadratic Wasserstein distance ``W2(nu, mu)`` via the monotone coupling."""
    sq = w2_squared_1d(nu, mu)
    v = math.sqrt(max(sq.value, 0.0))
    # d sqrt(u) = du / (2 sqrt(u)); fall back to sqrt(err) near zero
    err = sq.est_error / (2 * v) if v > math.sqrt(sq.est_error) else math.sqrt(sq.est_error)
    return FunctionalValue(v, err, "w2/monotone")


def _w1_coupling(nu, mu):
    tmap = monotone_map(nu, mu)
    x, t, dt = tmap.x, tmap.t_values, tmap.dt_values
    p = nu.p_nodes
    g = (x - t) * p
    dg = (1.0 - dt) * p + (x - t) * p * nu.dlog_p_nodes
    return integrate_abs(g, nu.grid, dg)


def _union_grid(nu, mu):
    lo = min(nu.grid.lo, mu.grid.lo)
    hi = max(nu.grid.hi, mu.grid.hi)
    h = min(nu.grid.spacing, mu.grid.spacing)
    count = int(math.ceil((hi - lo) / h)) + 1
    count += 1 - count % 2
    return Grid1D(lo, hi, count)


def _w1_cdf(nu, mu):
    grid = _union_grid(nu, mu)
    x = grid.nodes
    med = 0.5 * (nu.quantile_from_tails(math.log(0.5), math.log(0.5))[()]
                 + mu.quantile_from_tails(math.log(0.5), math.log(0.5))[()])
    left = x <= med
    # F_nu - F_mu on the left, S_mu - S_nu on the right (the same function)
    g = np.where(left, nu.cdf(x) - mu.cdf(x), mu.sf(x) - nu.sf(x))
    dg = nu.pdf(x) - mu.pdf(x)
    return integrate_abs(g, grid, dg)


def w1_1d(nu: RelativeDensity1D, mu: RelativeDensity1D | None = None,
          method: str = "cdf") -> FunctionalValue:
    """``W1(nu, mu)``.

    ``method="cdf"`` integrates ``|F_nu - F_mu|`` over the union of the two
    truncations; ``method="coupling"`` integrates ``|x - T(x)|`` against
    ``nu``. The reported error includes the disagreement of the two formulas.
    """
    mu = mu if mu is not None else standard_gaussian()
    cdf = _with_companion(_w1_cdf, nu, mu, "w1/cdf-difference")
    coup = _with_companion(_w1_coupling, nu, mu, "w1/coupling")
    gap = abs(cdf.value - coup.value)
    if method == "cdf":
        return FunctionalValue(cdf.value, cdf.est_error + gap, cdf.method)
    if method == "coupling":
        return FunctionalValue(coup.value, coup.est_error + gap, coup.method)
    raise ParameterError(f"unknown W1 method {method!r}")


def _as_product(nu):
    if isinstance(nu, ProductDensity):
        return nu
    return ProductDensity([nu])


def _gaussian_product(n):
    return ProductDensity([standard_gaussian()] * n)


def w11_product(nu, mu=None) -> FunctionalValue:
    """``W_{1,1}`` with the l1 ground cost: the sum of coordinate ``W1`` values."""
    nu = _as_product(nu)
    mu = _as_product(mu) if mu is not None else _gaussian_product(nu.dimension)
    if nu.dimension != mu.dimension:
        raise ParameterError(f"dimension mismatch: {nu.dimension} vs {mu.dimension}")
    parts = [w1_1d(a, b) for a, b in zip(nu, mu)]
    return FunctionalValue(sum(p.value for p in parts), sum(p.est_error for p in parts),
                           "w11/product")


def w2_product(nu, mu=None) -> FunctionalValue:
    """``W2`` between products: root of the summed squared coordinate distances."""
    nu = _as_product(nu)
    mu = _as_product(mu) if mu is not None else _gaussian_product(nu.dimension)
    if nu.dimension != mu.dimension:
        raise ParameterError(f"dimension mismatch: {nu.dimension} vs {mu.dimension}")
    sq = [w2_squared_1d(a, b) for a, b in zip(nu, mu)]
    total = sum(s.value for s in sq)
    err = sum(s.est_error for s in sq)
    v = math.sqrt(max(total, 0.0))
    return FunctionalValue(v, err / (2 * v) if v > math.sqrt(err) else math.sqrt(err),
                           "w2/product")


def w2_squared(nu, mu=None) -> FunctionalValue:
    if isinstance(nu, ProductDensity):
        nu_p = _as_product(nu)
        mu_p = _as_product(mu) if mu is not None else _gaussian_product(nu_p.dimension)
        sq = [w2_squared_1d(a, b) for a, b in zip(nu_p, mu_p)]
        return FunctionalValue(sum(s.value for s in sq), sum(s.est_error for s in sq),
                               "w2_squared/product")
    return w2_squared_1d(nu, mu)


def tal_deficit(nu) -> FunctionalValue:
    """Talagrand deficit ``2 H(nu) - W2(nu, gamma)^2``."""
    h = entropy(nu)
    w = w2_squared(nu)
    return FunctionalValue(2 * h.value - w.value, 2 * h.est_error + w.est_error, "tal_deficit")


def tal_lower_bound(w11: float, n: int, c: float = DEFAULT_TAL_CONSTANT) -> float:
    """``c * min(w11^2 / n, w11 / sqrt(n))``."""
    if w11 < 0:
        raise ParameterError("w11 must be nonnegative")
    if n < 1:
        raise ParameterError("dimension must be positive")
    return c * min(w11 * w11 / n, w11 / math.sqrt(n))


# ---------------------------------------------------------------------------
# discrete oracle

@dataclass(frozen=True)
class DiscreteMeasure:
    """Uniform empirical measure on ``k`` atoms in ``R^n``."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2:
            raise ParameterError("atoms must be a (k,) or (k, n) array")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)


def cost_matrix(a: DiscreteMeasure, b: DiscreteMeasure, cost: str) -> np.ndarray:
    diff = a.atoms[:, None, :] - b.atoms[None, :, :]
    if cost == "l1":
        return np.abs(diff).sum(axis=2)
    if cost == "l2_squared":
        return (diff * diff).sum(axis=2)
    raise ParameterError(f"unknown cost {cost!r}")


def _matching_total(c, perm):
    return math.fsum(c[i, perm[i]] for i in range(len(perm)))


def discrete_ot_oracle(a: DiscreteMeasure, b: DiscreteMeasure, cost: str = "l2_squared",
                       return_assignment: bool = False):
    """Exact optimal matching cost between two uniform measures of ``k <= 8`` atoms.

    Returns the total cost ``sum_i c(a_i, b_{sigma(i)})`` of the best
    permutation ``sigma`` found by exhaustive search; divide by ``k`` for the
    transport cost of the probability measures. The total is summed with
    ``math.fsum`` so it does not depend on the atom order.
    """
    a = a if isinstance(a, DiscreteMeasure) else DiscreteMeasure(a)
    b = b if isinstance(b, DiscreteMeasure) else DiscreteMeasure(b)
    if a.size != b.size:
        raise ParameterError("the oracle needs equal atom counts")
    if a.atoms.shape[1] != b.atoms.shape[1]:
        raise ParameterError("atoms live in different dimensions")
    if a.size > MAX_ORACLE_ATOMS:
        raise SizeError(f"exhaustive oracle limited to k <= {MAX_ORACLE_ATOMS}, got {a.size}")
    c = np.ascontiguousarray(cost_matrix(a, b, cost))
    _, perm = kernels.min_assignment_cost(c)
    total = _matching_total(c, perm)
    if return_assignment:
        return total, np.asarray(perm)
    return total


def monotone_matching_cost(a, b, cost: str = "l2_squared") -> float:
    """Sorted matching cost of two one-dimensional atom sets."""
    a = a if isinstance(a, DiscreteMeasure) else DiscreteMeasure(a)
    b = b if isinstance(b, DiscreteMeasure) else DiscreteMeasure(b)
    if a.atoms.shape[1] != 1 or b.atoms.shape[1] != 1:
        raise ParameterError("monotone matching is one-dimensional")
    ia = np.argsort(a.atoms[:, 0], kind="stable")
    ib = np.argsort(b.atoms[:, 0], kind="stable")
    c = cost_matrix(a, b, cost)
    perm = np.empty(a.size, dtype=np.int64)
    perm[ia] = ib
    return _matching_total(c, perm)


# ---------------------------------------------------------------------------
# phi, tilde phi and the Cordero-Erausquin quantities

def phi(t):
    """``t - log(1 + t)`` for ``t > -1``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= -1):
        raise ParameterError("phi is defined for t > -1")
    out = t - np.log1p(t)
    return out[()] if out.ndim == 0 else out


def tilde_phi(t):
    """Even convex minorant: ``t^2/6`` for ``|t| <= 1``, ``phi(|t|) - 5/6 + log 2`` beyond."""
    a = np.abs(np.asarray(t, dtype=float))
    big = np.maximum(a, 1.0)
    out = np.where(a <= 1.0, a * a / 6.0, big - np.log1p(big) - 5.0 / 6.0 + _LOG2)
    return out[()] if out.ndim == 0 else out


def tilde_phi_inverse(y):
    """Nonnegative inverse of ``tilde_phi``.

    On the outer branch ``u - log u = y + 11/6 - log 2`` with ``u = 1 + t``,
    solved by the lower real branch of the Lambert W function.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ParameterError("tilde_phi takes nonnegative values only")
    inner = np.sqrt(6.0 * np.minimum(y, 1.0 / 6.0))
    k = y + 11.0 / 6.0 - _LOG2
    km = np.maximum(k, 1.0)
    with np.errstate(under="ignore"):
        u = -special.lambertw(-np.exp(-np.minimum(km, 600.0)), -1).real
    # exp(-k) underflows for very large k; iterate u = k + log u there instead
    big = km > 600.0
    if np.any(big):
        v = km[big] if km.ndim else km
        w = v + np.log(v)
        for _ in range(6):
            w = v + np.log(w)
        if km.ndim:
            u[big] = w
        else:
            u = w
    out = np.where(y <= 1.0 / 6.0, inner, u - 1.0)
    return out[()] if out.ndim == 0 else out


def _gaussian_target_map(nu):
    return monotone_map(nu, standard_gaussian())


def _gap_quadratic(nu, _mu=None):
    tmap = _gaussian_target_map(nu)
    r = tmap.t_values - tmap.x + nu.dlogf_nodes
    return nu.expect(r * r)


def _gap_log(nu, _mu=None):
    tmap = _gaussian_target_map(nu)
    lt = tmap.log_dt_values
    return nu.expect(np.expm1(lt) - lt)


def _psi(nu, _mu=None):
    tmap = _gaussian_target_map(nu)
    dt = tmap.dt_values
    p = nu.p_nodes
    dlp = nu.dlog_p_nodes
    g = (dt - 1.0) * p
    # T'' = T' (dlog p(x) + T T') for the Gaussian target
    dg = dt * (dlp + tmap.t_values * dt) * p + (dt - 1.0) * p * dlp
    return integrate_abs(g, nu.grid, dg)


def cordero_gap_quadratic(nu: RelativeDensity1D) -> FunctionalValue:
    """``int |T - x + (log f)'|^2 d nu`` with ``T`` pushing ``nu`` to ``gamma``."""
    return _with_companion(_gap_quadratic, nu, None, "cordero_quadratic")


def cordero_gap_log(nu: RelativeDensity1D) -> FunctionalValue:
    """``int (T' - 1 - log T') d nu`` with ``T`` pushing ``nu`` to ``gamma``."""
    return _with_companion(_gap_log, nu, None, "cordero_log")


def psi_integral(nu: RelativeDensity1D) -> FunctionalValue:
    """``int |T' - 1| d nu`` with ``T`` pushing ``nu`` to ``gamma``."""
    return _with_companion(_psi, nu, None, "psi_integral")
