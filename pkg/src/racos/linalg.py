"""Dense linear-algebra primitives: SVD, norms, projections, hard thresholding, masks.

Matrices are plain float ndarrays throughout; the helpers here add the
validation and the exact threshold/projection conventions the detection
pipelines rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import require

# Tolerance for treating a basis as orthonormal in projection preconditions.
ORTHONORMAL_TOL = 1e-8

# Relative floor under which singular values count as numerically zero.
RANK_REL_TOL = 1e-12


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-d float array."""
    a = np.asarray(m, dtype=float)
    require(a.ndim == 2, f"{name} must be 2-dimensional, got ndim={a.ndim}")
    require(a.shape[0] >= 1 and a.shape[1] >= 1, f"{name} must be non-empty")
    require(bool(np.isfinite(a).all()), f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class CompactSVD:
    """Compact factorization u @ diag(sigma) @ v.T with strictly positive sigma."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((self.u.shape[0], self.v.shape[0]))
        return (self.u * self.sigma) @ self.v.T

    def validate(self) -> None:
        r = self.rank
        require(self.u.shape[1] == r and self.v.shape[1] == r, "factor widths disagree with sigma")
        require(bool(np.all(self.sigma > 0)), "sigma must be strictly positive")
        require(bool(np.all(np.diff(self.sigma) <= 0)), "sigma must be non-increasing")
        if r > 0:
            eye = np.eye(r)
            require(
                float(np.abs(self.u.T @ self.u - eye).max()) <= ORTHONORMAL_TOL,
                "left factor is not orthonormal",
            )
            require(
                float(np.abs(self.v.T @ self.v - eye).max()) <= ORTHONORMAL_TOL,
                "right factor is not orthonormal",
            )


@dataclass(frozen=True)
class ObservationMask:
    """Boolean table of observed cells."""

    observed: np.ndarray

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=bool)
        require(obs.ndim == 2, "mask must be 2-dimensional")
        object.__setattr__(self, "observed", obs)

    @property
    def shape(self) -> tuple[int, int]:
        return self.observed.shape

    @property
    def count(self) -> int:
        return int(self.observed.sum())

    @staticmethod
    def full(rows: int, cols: int) -> "ObservationMask":
        return ObservationMask(np.ones((rows, cols), dtype=bool))

    @staticmethod
    def from_pairs(rows: int, cols: int, pairs) -> "ObservationMask":
        obs = np.zeros((rows, cols), dtype=bool)
        for i, j in pairs:
            require(0 <= i < rows and 0 <= j < cols, f"mask index ({i},{j}) out of range")
            obs[i, j] = True
        return ObservationMask(obs)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.observed))]


@dataclass(frozen=True)
class MaskedMatrix:
    """Partially observed matrix; unobserved cells are stored as zero."""

    values: np.ndarray
    mask: ObservationMask

    def __post_init__(self):
        vals = as_matrix(self.values, "masked values")
        require(vals.shape == self.mask.shape, "values and mask dimensions disagree")
        object.__setattr__(self, "values", np.where(self.mask.observed, vals, 0.0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def compact_svd(m, rank_tolerance: float = 0.0) -> CompactSVD:
    """Compact SVD keeping singular values above max(rank_tolerance, tiny) * sigma_1.

    Returns an empty factorization (rank 0) for the zero matrix.
    """
    a = as_matrix(m)
    require(rank_tolerance >= 0.0, "rank_tolerance must be nonnegative")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return CompactSVD(np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((a.shape[1], 0)))
    cutoff = max(rank_tolerance, RANK_REL_TOL) * s[0]
    r = int(np.count_nonzero(s > cutoff))
    return CompactSVD(u[:, :r].copy(), s[:r].copy(), vt[:r].T.copy())


@dataclass(frozen=True)
class MatrixNorms:
    nuclear: float
    spectral: float
    l12: float
    linf2: float
    frobenius: float


def norms(m) -> MatrixNorms:
    """Nuclear, spectral, column-l2-sum, max-column-l2, and Frobenius norms."""
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    col = np.linalg.norm(a, axis=0)
    return MatrixNorms(
        nuclear=float(s.sum()),
        spectral=float(s[0]) if s.size else 0.0,
        l12=float(col.sum()),
        linf2=float(col.max()) if col.size else 0.0,
        frobenius=float(np.linalg.norm(a)),
    )


def hard_threshold_svd(svd: CompactSVD, alpha: float) -> np.ndarray:
    """Reconstruction keeping only singular values strictly greater than alpha.

    Values exactly equal to alpha are dropped.
    """
    require(alpha >= 0.0, "alpha must be nonnegative")
    keep = svd.sigma > alpha
    r = int(np.count_nonzero(keep))
    if r == 0:
        return np.zeros((svd.u.shape[0], svd.v.shape[0]))
    return (svd.u[:, :r] * svd.sigma[:r]) @ svd.v[:, :r].T


def alpha_from_energy_fraction(svd: CompactSVD, fraction: float) -> float:
    """Threshold preserving the given fraction of the singular-value sum.

    Finds the shortest leading run of singular values whose sum reaches
    fraction * total, and returns the midpoint between the last kept value and
    the first dropped one (0 when nothing is dropped), so strict thresholding
    at the returned value reproduces exactly that kept set.
    """
    require(0.0 < fraction <= 1.0, "fraction must be in (0, 1]")
    require(svd.rank > 0, "empty spectrum")
    cum = np.cumsum(svd.sigma)
    total = cum[-1]
    kept = int(np.searchsorted(cum, fraction * total - 1e-12 * total) + 1)
    if kept >= svd.rank:
        return 0.0
    return float(0.5 * (svd.sigma[kept - 1] + svd.sigma[kept]))


def _check_orthonormal(basis_u: np.ndarray) -> np.ndarray:
    b = np.asarray(basis_u, dtype=float)
    require(b.ndim == 2 and b.shape[0] >= 1, "basis must be a 2-d array with rows")
    if b.shape[1] == 0:  # rank-0 subspace: projection is the identity
        return b
    require(bool(np.isfinite(b).all()), "basis contains non-finite entries")
    gram = b.T @ b
    require(
        float(np.abs(gram - np.eye(b.shape[1])).max()) <= ORTHONORMAL_TOL,
        "basis columns are not orthonormal",
    )
    return b


def project_complement(basis_u, x) -> np.ndarray:
    """(I - U U^T) x for an orthonormal basis U; U may have zero columns."""
    b = _check_orthonormal(basis_u)
    a = as_matrix(x, "x")
    require(a.shape[0] == b.shape[0], "basis and x row counts disagree")
    if b.shape[1] == 0:
        return a.copy()
    return a - b @ (b.T @ a)


def column_residuals(m, basis_u) -> np.ndarray:
    """Per-column Euclidean norm of the part of m outside span(basis_u)."""
    res = project_complement(basis_u, m)
    return np.linalg.norm(res, axis=0)


@dataclass(frozen=True)
class ColumnIncoherence:
    mu_v: float
    r: int
    n_l: int


@dataclass(frozen=True)
class RowIncoherence:
    mu_u: float
    r: int
    n1: int


def column_incoherence(l) -> ColumnIncoherence:
    """Max column leverage of the row-space basis, normalized to land in [1, n_l/r].

    n_l counts the nonzero columns; r is the numerical rank.
    """
    a = as_matrix(l)
    svd = compact_svd(a)
    require(svd.rank > 0, "zero matrix has no incoherence")
    n_l = int(np.count_nonzero(np.linalg.norm(a, axis=0) > 0))
    lev = np.sum(svd.v**2, axis=1)
    return ColumnIncoherence(mu_v=float(n_l / svd.rank * lev.max()), r=svd.rank, n_l=n_l)


def row_incoherence(l) -> RowIncoherence:
    """Mirror of column_incoherence for the column-space basis, normalized by n1."""
    a = as_matrix(l)
    svd = compact_svd(a)
    require(svd.rank > 0, "zero matrix has no incoherence")
    n1 = a.shape[0]
    lev = np.sum(svd.u**2, axis=1)
    return RowIncoherence(mu_u=float(n1 / svd.rank * lev.max()), r=svd.rank, n1=n1)


def apply_mask(m, omega: ObservationMask) -> MaskedMatrix:
    """Zero out every cell outside the mask."""
    a = as_matrix(m)
    require(a.shape == omega.shape, "matrix and mask dimensions disagree")
    return MaskedMatrix(values=np.where(omega.observed, a, 0.0), mask=omega)
