"""Dense symmetric positive-definite matrix kernel.

Construction with explicit pivot diagnostics, Cholesky-backed solves and
determinants, and the block inverse of a bordered precision matrix (one
scalar row/column attached to a diagonal block). Matrices here are small
and dense (dim <= ~20); near-PD inputs are rejected rather than repaired
so that downstream identity checks never run on silently altered data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "PdMatrix",
    "PrecisionBlocks",
    "NotPositiveDefiniteError",
    "InternalConsistencyError",
    "cholesky_solve",
    "precision_blocks_from_variances",
    "assemble_precision",
    "partitioned_inverse_check",
    "assemble_bordered_cov",
    "full_cov_determinant",
]

# pivot acceptance: pivot > dim * _PIVOT_RTOL * max diagonal entry
_PIVOT_RTOL = 1e-12
_ASYM_RTOL = 1e-8
_RESID_FROB_TOL = 1e-10
_DET_RTOL = 1e-10


class NotPositiveDefiniteError(ValueError):
    """A Cholesky pivot fell below the scale-aware acceptance threshold."""

    def __init__(self, pivot_index: int, pivot: float, threshold: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        self.threshold = threshold
        super().__init__(
            f"not positive definite: pivot {pivot:.6g} at index {pivot_index} "
            f"is not above threshold {threshold:.6g}"
        )


class InternalConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagreed."""


def _cholesky_lower(entries: np.ndarray) -> np.ndarray:
    """Unblocked lower Cholesky with per-pivot diagnostics."""
    n = entries.shape[0]
    threshold = n * _PIVOT_RTOL * float(np.max(np.diagonal(entries)))
    chol = np.zeros_like(entries)
    for j in range(n):
        pivot = float(entries[j, j] - chol[j, :j] @ chol[j, :j])
        if not pivot > threshold:
            raise NotPositiveDefiniteError(j, pivot, threshold)
        root = math.sqrt(pivot)
        chol[j, j] = root
        if j + 1 < n:
            chol[j + 1:, j] = (entries[j + 1:, j] - chol[j + 1:, :j] @ chol[j, :j]) / root
    return chol


class PdMatrix:
    """Immutable SPD matrix with its lower Cholesky factor computed eagerly.

    Use :meth:`from_entries` for general input; the constructor itself
    expects an already-symmetric float array and only runs the Cholesky
    validation.
    """

    __slots__ = ("_entries", "_chol")

    def __init__(self, entries: np.ndarray):
        entries = np.array(entries, dtype=float)
        self._chol = _cholesky_lower(entries)
        entries.flags.writeable = False
        self._chol.flags.writeable = False
        self._entries = entries

    @classmethod
    def from_entries(cls, dim: int, entries) -> "PdMatrix":
        """Validate, symmetrize ((M + M^T)/2) and factor a dim x dim array."""
        if dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        arr = np.asarray(entries, dtype=float)
        if arr.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        scale = float(np.max(np.abs(arr)))
        asym = float(np.max(np.abs(arr - arr.T)))
        if scale > 0.0 and asym > _ASYM_RTOL * scale:
            raise ValueError(
                f"matrix is asymmetric beyond tolerance: max |M - M^T| = {asym:.3g} "
                f"vs {_ASYM_RTOL:.0e} * max |M| = {_ASYM_RTOL * scale:.3g}"
            )
        return cls(0.5 * (arr + arr.T))

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Read-only view of the symmetric entries."""
        return self._entries

    @property
    def chol(self) -> np.ndarray:
        """Read-only view of the lower Cholesky factor."""
        return self._chol

    def det(self) -> float:
        d = np.diagonal(self._chol)
        return float(np.prod(d) ** 2)

    def solve(self, rhs) -> np.ndarray:
        return cholesky_solve(self, rhs)

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "entries": self._entries.tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PdMatrix":
        try:
            dim = obj["dim"]
            entries = obj["entries"]
        except (TypeError, KeyError) as exc:
            raise ValueError("matrix JSON must have 'dim' and 'entries' keys") from exc
        if not isinstance(dim, int):
            raise ValueError(f"matrix 'dim' must be an integer, got {dim!r}")
        return cls.from_entries(dim, entries)

    def __repr__(self) -> str:
        return f"PdMatrix(dim={self.dim})"


def cholesky_solve(m: PdMatrix, rhs) -> np.ndarray:
    """Solve M x = rhs through the cached Cholesky factor."""
    b = np.asarray(rhs, dtype=float)
    if b.shape != (m.dim,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({m.dim},)")
    y = solve_triangular(m.chol, b, lower=True)
    return solve_triangular(m.chol.T, y, lower=False)


@dataclass(frozen=True, eq=False)
class PrecisionBlocks:
    """Blocks of a bordered precision matrix [[a, b], [b^T, diag(d_diag)]].

    ``a`` is the scalar corner, ``b`` the coupling row, and ``d_diag`` the
    diagonal of the remaining block. The scalar Schur complement
    a - sum(b^2 / d_diag) must be positive for the matrix to be PD.
    """

    a: float
    b: np.ndarray
    d_diag: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        d = np.atleast_1d(np.asarray(self.d_diag, dtype=float))
        if b.ndim != 1 or d.shape != b.shape:
            raise ValueError("b and d_diag must be 1-d with matching length")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(d)) and math.isfinite(self.a)):
            raise ValueError("precision blocks must be finite")
        if not np.all(d > 0.0):
            raise ValueError("d_diag entries must be positive")
        if not self.a - float(b @ (b / d)) > 0.0:
            raise ValueError("scalar Schur complement a - sum(b^2/d) must be positive")
        b.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d_diag", d)

    @property
    def n(self) -> int:
        return self.b.shape[0]


def precision_blocks_from_variances(sigma2: float, v) -> PrecisionBlocks:
    """Precision blocks of the joint scalar-plus-offsets Gaussian model.

    A latent scalar w ~ N(0, sigma2) shared by offsets z_r with independent
    variances v_r^2 has joint precision with corner sum(1/v^2) + 1/sigma2,
    coupling row 1/v^2 and diagonal block 1/v^2.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if sigma2 <= 0.0 or not math.isfinite(sigma2):
        raise ValueError(f"sigma2 must be positive and finite, got {sigma2!r}")
    if v.ndim != 1 or v.size < 1 or not np.all(np.isfinite(v)) or not np.all(v > 0.0):
        raise ValueError("v must be a non-empty vector of positive finite reals")
    inv_v2 = 1.0 / (v * v)
    return PrecisionBlocks(a=float(np.sum(inv_v2)) + 1.0 / sigma2, b=inv_v2, d_diag=inv_v2)


def assemble_precision(blocks: PrecisionBlocks) -> np.ndarray:
    """Dense (n+1) x (n+1) precision matrix from its blocks."""
    n = blocks.n
    out = np.zeros((n + 1, n + 1))
    out[0, 0] = blocks.a
    out[0, 1:] = blocks.b
    out[1:, 0] = blocks.b
    out[1:, 1:] = np.diag(blocks.d_diag)
    return out


def partitioned_inverse_check(blocks: PrecisionBlocks) -> PdMatrix:
    """Invert a bordered precision matrix by the partitioned-inverse formula.

    With s = a - b D^-1 b^T the covariance blocks are 1/s (corner),
    -(1/s) b D^-1 (border) and D^-1 + (1/s) D^-1 b^T b D^-1 (body). The
    result is multiplied back against the assembled precision and must
    reproduce the identity to within Frobenius norm 1e-10, otherwise an
    :class:`InternalConsistencyError` is raised.
    """
    n = blocks.n
    bd = blocks.b / blocks.d_diag
    s = blocks.a - float(blocks.b @ bd)
    cov = np.zeros((n + 1, n + 1))
    cov[0, 0] = 1.0 / s
    cov[0, 1:] = -bd / s
    cov[1:, 0] = -bd / s
    cov[1:, 1:] = np.diag(1.0 / blocks.d_diag) + np.outer(bd, bd) / s
    resid = float(np.linalg.norm(cov @ assemble_precision(blocks) - np.eye(n + 1)))
    if resid > _RESID_FROB_TOL:
        raise InternalConsistencyError(
            f"partitioned inverse residual {resid:.3g} exceeds {_RESID_FROB_TOL:.0e}"
        )
    return PdMatrix.from_entries(n + 1, cov)


def assemble_bordered_cov(sigma2: float, v) -> np.ndarray:
    """Covariance matching :func:`precision_blocks_from_variances`.

    Corner sigma2, border -sigma2, and body diag(v^2) + sigma2 (dense).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n = v.size
    out = np.full((n + 1, n + 1), sigma2)
    out[0, 1:] = -sigma2
    out[1:, 0] = -sigma2
    out[1:, 1:] += np.diag(v * v)
    return out


def full_cov_determinant(sigma2: float, v) -> float:
    """Determinant of the bordered covariance, computed two ways.

    Returns the Cholesky value prod(diag(L))^2 after asserting it agrees
    with the closed form sigma2 * prod(v^2) to 1e-10 relative; disagreement
    raises :class:`InternalConsistencyError`.
    """
    precision_blocks_from_variances(sigma2, v)  # input validation
    v = np.atleast_1d(np.asarray(v, dtype=float))
    full = PdMatrix.from_entries(v.size + 1, assemble_bordered_cov(sigma2, v))
    det_chol = full.det()
    det_closed = sigma2 * float(np.prod(v * v))
    if abs(det_chol - det_closed) > _DET_RTOL * abs(det_closed):
        raise InternalConsistencyError(
            f"determinant mismatch: Cholesky {det_chol!r} vs closed form {det_closed!r}"
        )
    return det_chol
