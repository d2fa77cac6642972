"""Multivariate Bernoulli distribution on {-1, +1}^N with a probit link.

A latent vector f ~ N(mu, Sigma) drives N conditionally independent
Bernoulli trials with success probability Phi(f_r), recorded as signs
y_r in {-1, +1}. Marginally the sign vector has

    pmf(y) = F_N(D_y mu | 0, I + D_y Sigma D_y),   D_y = diag(y),

an orthant probability of the noise-augmented latent Gaussian. The family
is closed under marginalization of coordinates, and sampling reduces to
y = sign(f + eps) with eps ~ N(0, I) drawn alongside f.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gauss_scalar import cdf as _scalar_cdf
from .mvn_cdf import MvnEstimate, MvnQuery
from .mvn_cdf import cdf as _mvn_cdf
from .pd_matrix import PdMatrix

__all__ = ["SignVector", "ProbitBernoulli"]

_MAX_ENUM_DIM = 15


@dataclass(frozen=True)
class SignVector:
    """A point of the support: a tuple of entries that are exactly -1 or +1."""

    signs: tuple[int, ...]

    def __post_init__(self):
        cleaned = []
        for s in self.signs:
            if s != -1 and s != 1:
                raise ValueError(f"sign entries must be -1 or +1, got {s!r}")
            cleaned.append(int(s))
        object.__setattr__(self, "signs", tuple(cleaned))
        if len(self.signs) == 0:
            raise ValueError("sign vector must be non-empty")

    def __len__(self) -> int:
        return len(self.signs)

    def __iter__(self):
        return iter(self.signs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)

    def flipped(self) -> "SignVector":
        return SignVector(tuple(-s for s in self.signs))


class ProbitBernoulli:
    """Sign-vector distribution induced by probit trials on a latent Gaussian."""

    def __init__(self, mu, sigma: PdMatrix):
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if mu.shape != (sigma.dim,):
            raise ValueError(
                f"mu has shape {mu.shape}, expected ({sigma.dim},) to match sigma"
            )
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu entries must be finite")
        mu.flags.writeable = False
        self._mu = mu
        self._sigma = sigma

    @property
    def dim(self) -> int:
        return self._mu.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return self._mu

    @property
    def sigma(self) -> PdMatrix:
        return self._sigma

    def _query(self, y: SignVector, accuracy: float) -> MvnQuery:
        ys = y.as_array()
        if ys.shape != (self.dim,):
            raise ValueError(f"sign vector has length {len(y)}, expected {self.dim}")
        cov = PdMatrix.from_entries(
            self.dim, np.eye(self.dim) + self._sigma.entries * np.outer(ys, ys)
        )
        return MvnQuery(upper=ys * self._mu, mean=np.zeros(self.dim), cov=cov,
                        accuracy=accuracy)

    def pmf(self, y: SignVector, accuracy: float = 1e-6, seed: int = 0) -> MvnEstimate:
        """P(Y = y) as an MVN CDF evaluation, with its error estimate."""
        return _mvn_cdf(self._query(y, accuracy), seed=seed)

    def log_pmf(self, y: SignVector, accuracy: float = 1e-6, seed: int = 0) -> float:
        """log P(Y = y); -inf when the pmf estimate underflows to zero."""
        value = self.pmf(y, accuracy=accuracy, seed=seed).value
        if value <= 0.0:
            return -math.inf
        return math.log(value)

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        """Draw ``count`` sign vectors; returns a (count, dim) array of -1/+1.

        Each row is sign(f + eps) with f ~ N(mu, Sigma) and eps ~ N(0, I),
        which realizes the probit trials exactly. Deterministic given seed.
        """
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count!r}")
        rng = np.random.default_rng(seed % (1 << 63))
        latent = self._mu + rng.standard_normal((count, self.dim)) @ self._sigma.chol.T
        noise = rng.standard_normal((count, self.dim))
        return np.where(latent + noise >= 0.0, 1, -1).astype(np.int8)

    def support(self):
        """All 2^dim sign vectors in a fixed deterministic order."""
        for signs in itertools.product((-1, 1), repeat=self.dim):
            yield SignVector(signs)

    def normalization(self, accuracy: float = 1e-6, seed: int = 0) -> float:
        """Sum of pmf over the whole support; should be 1 within 2^dim * accuracy."""
        if self.dim > _MAX_ENUM_DIM:
            raise ValueError(
                f"support enumeration limited to dim <= {_MAX_ENUM_DIM}, got {self.dim}"
            )
        return sum(self.pmf(y, accuracy=accuracy, seed=seed).value for y in self.support())

    def mean(self) -> np.ndarray:
        """E[Y], exactly 2 Phi(mu_r / sqrt(1 + Sigma_rr)) - 1 per component."""
        diag = np.diagonal(self._sigma.entries)
        return np.asarray(
            [2.0 * _scalar_cdf(m / math.sqrt(1.0 + s)) - 1.0
             for m, s in zip(self._mu, diag)]
        )

    def marginalize(self, keep) -> "ProbitBernoulli":
        """Distribution of the coordinates in ``keep`` (0-based indices).

        Marginalizing the latent Gaussian marginalizes the sign vector, so
        this just restricts (mu, Sigma).
        """
        requested = [int(i) for i in keep]
        idx = sorted(set(requested))
        if len(idx) == 0:
            raise ValueError("keep must be a non-empty index set")
        if len(idx) != len(requested):
            raise ValueError("keep must not contain duplicate indices")
        if idx[0] < 0 or idx[-1] >= self.dim:
            raise ValueError(f"keep indices must lie in [0, {self.dim})")
        sub = PdMatrix.from_entries(len(idx), self._sigma.entries[np.ix_(idx, idx)])
        return ProbitBernoulli(self._mu[idx], sub)

    def __repr__(self) -> str:
        return f"ProbitBernoulli(dim={self.dim})"
