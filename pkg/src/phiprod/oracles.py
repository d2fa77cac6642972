"""Independent numerical ground truth for the closed forms.

Every identity in this package is checked against a second route that
shares no code with the path under test:

* Gauss-Hermite quadrature for the scalar-mixing CDF product integral,
  with nodes and weights built at first use by Newton iteration on the
  Hermite recurrence (no tabulated constants).
* Plain Monte Carlo for the vector-mixing integral and for raw MVN
  rectangle probabilities, with honest standard errors.
* Adaptive Simpson quadrature for Owen's T and the bivariate CDF.

All stochastic oracles are deterministic given their seed.
"""

from __future__ import annotations

import functools
import math
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .identities import ScalarMixParams, VectorMixParams
from .mvn_cdf import MvnQuery

__all__ = [
    "QuadratureDepthError",
    "gauss_hermite_nodes",
    "cdf_product_scalar_quad",
    "cdf_product_vector_mc",
    "mvn_mc",
    "adaptive_quad_1d",
    "owen_t_integrand",
    "bivariate_cdf_quad",
]

_MC_CHUNK = 1 << 19
_SQRT_PI = math.sqrt(math.pi)
_INV_2PI = 1.0 / (2.0 * math.pi)
_MIN_QUAD_TOL = 1e-13
_MAX_QUAD_DEPTH = 50


class QuadratureDepthError(RuntimeError):
    """Adaptive refinement hit the depth limit; carries the partial estimate."""

    def __init__(self, partial: float):
        self.partial = partial
        super().__init__(f"adaptive quadrature exceeded max depth (partial={partial!r})")


def _hermite_scaled(order: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal Hermite value and derivative, damped by exp(-z^2/2).

    The damping keeps every intermediate O(1) for any order (the bare
    polynomials overflow near the extreme roots for order >~ 190), and it
    cancels in the Newton ratio value/derivative.
    """
    p1 = math.pi ** -0.25 * np.exp(-0.5 * z * z)
    p2 = np.zeros_like(p1)
    for j in range(1, order + 1):
        p1, p2 = z * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1.0) / j) * p2, p1
    return p1, math.sqrt(2.0 * order) * p2


@functools.lru_cache(maxsize=8)
def gauss_hermite_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integral f(t) exp(-t^2) dt ~ sum w_i f(t_i).

    The positive roots are bracketed by a sign scan of the damped Hermite
    recurrence on a grid finer than the minimal root spacing pi/sqrt(2n+1)
    and polished by bracket-safeguarded Newton iteration; the negative
    half follows by symmetry. Nodes are returned in ascending order.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order!r}")
    if order == 1:
        return np.zeros(1), np.asarray([_SQRT_PI])
    n_pos = order // 2
    zmax = math.sqrt(2.0 * order + 1.0)
    step = math.pi / (3.0 * zmax)
    grid = np.arange(step / 7.0, zmax + step, step)
    values = _hermite_scaled(order, grid)[0]
    flips = np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:]))
    if flips.size != n_pos:
        raise RuntimeError(
            f"bracketing found {flips.size} positive roots, expected {n_pos}")
    lo = grid[flips]
    hi = grid[flips + 1]
    lo_sign = np.sign(values[flips])
    z = 0.5 * (lo + hi)
    for _ in range(100):
        val, deriv = _hermite_scaled(order, z)
        shrink = np.sign(val) == lo_sign
        lo = np.where(shrink, z, lo)
        hi = np.where(shrink, hi, z)
        z_new = z - val / deriv
        outside = ~np.isfinite(z_new) | (z_new <= lo) | (z_new >= hi)
        z_new = np.where(outside, 0.5 * (lo + hi), z_new)
        if np.all(np.abs(z_new - z) <= 1e-15 * np.maximum(1.0, np.abs(z))):
            z = z_new
            break
        z = z_new
    deriv = _hermite_scaled(order, z)[1]
    # w = 2 / H'(z)^2 with the damping restored; the square of the damped
    # ratio avoids overflow and underflows cleanly for the far-tail nodes
    t = math.sqrt(2.0) * np.exp(-0.5 * z * z) / deriv
    w_pos = t * t
    if order % 2 == 1:
        center_w = 2.0 / _hermite_scaled(order, np.zeros(1))[1] ** 2
        x = np.concatenate([-z[::-1], [0.0], z])
        w = np.concatenate([w_pos[::-1], center_w, w_pos])
    else:
        x = np.concatenate([-z[::-1], z])
        w = np.concatenate([w_pos[::-1], w_pos])
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def cdf_product_scalar_quad(params: ScalarMixParams, order: int = 200) -> float:
    """Gauss-Hermite value of E[prod_r Phi((x - m_r)/v_r)], x ~ N(mu, sigma2).

    Substituting x = mu + sigma * sqrt(2) * t reduces the integral to the
    exp(-t^2) weight; the result is deterministic and converges as the
    order grows (certify with an order-doubling comparison).
    """
    if not 20 <= order <= 400:
        raise ValueError(f"order must lie in [20, 400], got {order!r}")
    t, w = gauss_hermite_nodes(order)
    sigma = math.sqrt(params.sigma2)
    xs = params.mu + sigma * math.sqrt(2.0) * t
    factors = ndtr((xs[:, None] - params.m[None, :]) / params.v[None, :])
    return float(w @ np.prod(factors, axis=1)) / _SQRT_PI


def cdf_product_vector_mc(params: VectorMixParams, draws: int = 1_000_000,
                          seed: int = 0) -> tuple[float, float]:
    """Monte Carlo value of E[prod_r Phi((x_r - m_r)/v_r)], x ~ N(mu, Sigma).

    Returns (estimate, standard error). Draws are processed in fixed-size
    chunks so memory stays bounded and the result is independent of chunk
    partitioning for a given seed.
    """
    if draws < 10_000:
        raise ValueError(f"draws must be >= 1e4, got {draws!r}")
    rng = np.random.default_rng(seed % (1 << 63))
    chol_t = params.sigma.chol.T
    total = 0.0
    total_sq = 0.0
    remaining = draws
    while remaining > 0:
        block = min(remaining, _MC_CHUNK)
        x = params.mu + rng.standard_normal((block, params.n)) @ chol_t
        t = np.prod(ndtr((x - params.m) / params.v), axis=1)
        total += float(t.sum())
        total_sq += float((t * t).sum())
        remaining -= block
    mean = total / draws
    var = max(total_sq / draws - mean * mean, 0.0) * draws / (draws - 1)
    return mean, math.sqrt(var / draws)


def mvn_mc(query: MvnQuery, draws: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Crude Monte Carlo for P(Z <= upper), Z ~ N(mean, cov).

    Returns (estimate, standard error) from the indicator fraction.
    """
    if draws < 10_000:
        raise ValueError(f"draws must be >= 1e4, got {draws!r}")
    rng = np.random.default_rng(seed % (1 << 63))
    chol_t = query.cov.chol.T
    hits = 0
    remaining = draws
    while remaining > 0:
        block = min(remaining, _MC_CHUNK)
        z = query.mean + rng.standard_normal((block, query.dim)) @ chol_t
        hits += int(np.all(z <= query.upper, axis=1).sum())
        remaining -= block
    p = hits / draws
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / (draws - 1))


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def _adaptive(f: Callable[[float], float], a: float, b: float, fa: float,
              fm: float, fb: float, whole: float, tol: float, depth: int) -> float:
    mid = 0.5 * (a + b)
    lm = 0.5 * (a + mid)
    rm = 0.5 * (mid + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, mid - a)
    right = _simpson(fm, frm, fb, b - mid)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureDepthError(left + right + delta / 15.0)
    half_tol = 0.5 * tol
    # accumulate sibling contributions into the partial estimate so a
    # depth failure still reports the whole-interval value
    try:
        left_val = _adaptive(f, a, mid, fa, flm, fm, left, half_tol, depth - 1)
    except QuadratureDepthError as exc:
        try:
            right_val = _adaptive(f, mid, b, fm, frm, fb, right, half_tol, depth - 1)
        except QuadratureDepthError as exc_right:
            raise QuadratureDepthError(exc.partial + exc_right.partial) from None
        raise QuadratureDepthError(exc.partial + right_val) from None
    try:
        return left_val + _adaptive(f, mid, b, fm, frm, fb, right, half_tol, depth - 1)
    except QuadratureDepthError as exc:
        raise QuadratureDepthError(left_val + exc.partial) from None


def adaptive_quad_1d(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b] to absolute tolerance.

    Signed like the usual integral (swapping a and b negates the result).
    Raises :class:`QuadratureDepthError` with the partial estimate attached
    if refinement exceeds the depth limit.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if tol < _MIN_QUAD_TOL:
        raise ValueError(f"tol must be >= {_MIN_QUAD_TOL:g}, got {tol!r}")
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_quad_1d(f, b, a, tol)
    fa = f(a)
    fb = f(b)
    fm = f(0.5 * (a + b))
    whole = _simpson(fa, fm, fb, b - a)
    return _adaptive(f, a, b, fa, fm, fb, whole, tol, _MAX_QUAD_DEPTH)


def owen_t_integrand(h: float) -> Callable[[float], float]:
    """The defining Owen's T integrand x -> exp(-h^2(1+x^2)/2)/((1+x^2) 2 pi)."""
    def f(x: float) -> float:
        s = 1.0 + x * x
        return _INV_2PI * math.exp(-0.5 * h * h * s) / s
    return f


def bivariate_cdf_quad(h: float, k: float, rho: float, tol: float = 1e-13) -> float:
    """Bivariate normal CDF by conditioning + adaptive quadrature.

    Integrates phi(x) Phi((k - rho x)/sqrt(1-rho^2)) for x up to h; shares
    no code with the Owen's T construction it is used to check.
    """
    root = math.sqrt((1.0 - rho) * (1.0 + rho))
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)

    def f(x: float) -> float:
        return inv_sqrt_2pi * math.exp(-0.5 * x * x) * float(ndtr((k - rho * x) / root))

    return adaptive_quad_1d(f, h - 40.0, h, tol)
