"""Closed forms for Gaussian expectations of products of normal CDFs.

Two classical-style reductions are provided, each collapsing an integral
of a product of probit factors against a Gaussian density into a single
multivariate normal CDF evaluation:

* scalar mixing variable:

      E_x[ prod_r Phi((x - m_r)/v_r) ],  x ~ N(mu, sigma2)
        = F_N(mu * 1 | m, diag(v^2) + sigma2 * 1 1^T)

* vector mixing variable:

      E_x[ prod_r Phi((x_r - m_r)/v_r) ],  x ~ N(mu, Sigma)
        = F_N(mu | m, diag(v^2) + Sigma)

The N = 1 case of either is the familiar Phi((mu - m)/sqrt(v^2 + sigma2))
moment used throughout Gaussian-process classification. Both closed forms
are evaluated through :mod:`phiprod.mvn_cdf` and carry its error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mvn_cdf import MvnEstimate, MvnQuery
from .mvn_cdf import cdf as _mvn_cdf
from .pd_matrix import PdMatrix

__all__ = [
    "ScalarMixParams",
    "VectorMixParams",
    "shared_noise_cov",
    "cdf_product_scalar",
    "cdf_product_vector",
]


def _check_m_v(m: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.atleast_1d(np.asarray(m, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if m.ndim != 1 or v.shape != m.shape or m.size < 1:
        raise ValueError("m and v must be 1-d vectors of equal positive length")
    if not np.all(np.isfinite(m)):
        raise ValueError("m entries must be finite")
    if not np.all(np.isfinite(v)) or not np.all(v > 0.0):
        raise ValueError("v entries must be positive and finite")
    m.flags.writeable = False
    v.flags.writeable = False
    return m, v


@dataclass(frozen=True, eq=False)
class ScalarMixParams:
    """(mu, sigma2, m, v) for the scalar-mixing CDF product expectation."""

    mu: float
    sigma2: float
    m: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not math.isfinite(self.sigma2) or self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        m, v = _check_m_v(self.m, self.v)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.m.size


@dataclass(frozen=True, eq=False)
class VectorMixParams:
    """(mu, Sigma, m, v) for the vector-mixing CDF product expectation."""

    mu: np.ndarray
    sigma: PdMatrix
    m: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        m, v = _check_m_v(self.m, self.v)
        if mu.shape != m.shape or self.sigma.dim != m.size:
            raise ValueError("mu, m, v and sigma dimensions must agree")
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu entries must be finite")
        mu.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.m.size


def shared_noise_cov(sigma2: float, v) -> PdMatrix:
    """Covariance diag(v^2) + sigma2 * 1 1^T of offsets sharing one noise term.

    Every off-diagonal entry is sigma2 and the diagonal is v_r^2 + sigma2;
    the rank-1-plus-diagonal structure is PD for any positive inputs.
    """
    if not math.isfinite(sigma2) or sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be positive and finite, got {sigma2!r}")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or v.size < 1 or not np.all(np.isfinite(v)) or not np.all(v > 0.0):
        raise ValueError("v must be a non-empty vector of positive finite reals")
    n = v.size
    entries = np.full((n, n), sigma2)
    np.fill_diagonal(entries, v * v + sigma2)
    return PdMatrix.from_entries(n, entries)


def cdf_product_scalar(params: ScalarMixParams, accuracy: float = 1e-6,
                       seed: int = 0) -> MvnEstimate:
    """Closed form for E[prod_r Phi((x - m_r)/v_r)], x ~ N(mu, sigma2).

    Evaluates F_N(mu * 1 | m, diag(v^2) + sigma2 * 1 1^T); the accuracy
    target is forwarded to the MVN CDF engine unchanged.
    """
    cov = shared_noise_cov(params.sigma2, params.v)
    query = MvnQuery(
        upper=np.full(params.n, params.mu),
        mean=params.m,
        cov=cov,
        accuracy=accuracy,
    )
    return _mvn_cdf(query, seed=seed)


def cdf_product_vector(params: VectorMixParams, accuracy: float = 1e-6,
                       seed: int = 0) -> MvnEstimate:
    """Closed form for E[prod_r Phi((x_r - m_r)/v_r)], x ~ N(mu, Sigma).

    Evaluates F_N(mu | m, diag(v^2) + Sigma).
    """
    cov = PdMatrix.from_entries(
        params.n, params.sigma.entries + np.diag(params.v * params.v)
    )
    query = MvnQuery(upper=params.mu, mean=params.m, cov=cov, accuracy=accuracy)
    return _mvn_cdf(query, seed=seed)
