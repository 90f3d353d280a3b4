"""The two end-to-end detectors for outlier columns of a large low-rank matrix.

Noisy path: compress rows with a Gaussian embedding, solve the noisy
decomposition on a random column subsample, denoise the subspace estimate by
hard singular-value thresholding, then score every column of the compressed
matrix by its residual outside that subspace.

Incomplete path: subsample rows and columns of the partially observed matrix,
optionally trim over-observed columns, solve the masked decomposition, then
score each column by the residual of its observed entries outside the span of
the correspondingly restricted low-rank estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import alpha_window_gaussian
from .errors import EmptySample, InvalidInput, NoSeparation, require
from .linalg import (
    MaskedMatrix,
    ObservationMask,
    alpha_from_energy_fraction,
    as_matrix,
    compact_svd,
    project_complement,
)
from .sampling import ColumnSet, RngSeed, bernoulli_select, gaussian_jl, trim_columns
from .solvers import (
    SolverOptions,
    lambda_mp_theory,
    lambda_op_theory,
    manipulator_pursuit,
    outlier_pursuit_noisy,
)

# Policy tuples.  Regularization weight: ("fixed", value) or ("theory", ...)
# with the arguments of the matching lambda_*_theory calculator.  Subspace
# threshold: ("fixed", value), ("energy", fraction), or ("noise_window",
# sigma[, delta]).  Detection threshold: ("fixed", value), ("largest_gap",),
# or ("oracle", true_outlier_indices).


@dataclass(frozen=True)
class RacosNParams:
    """Inputs of the noisy detector.

    q = 0 selects the identity second-stage reduction (score directly on the
    projected residuals).  epsilon1 is expressed at unit measurement scale and
    co-scales with phi_scale.  If epsilon1_noise_sigma is set, epsilon1 is
    derived per run as sigma * sqrt(n1 * sampled_columns): the expected
    Frobenius norm of the noise carried into the compressed subsample by a
    norm-preserving embedding.
    """

    gamma: float
    m: int
    q: int = 0
    lambda_policy: tuple = ("fixed", 0.4)
    alpha_policy: tuple = ("energy", 0.99)
    epsilon1: float = 0.0
    epsilon1_noise_sigma: float | None = None
    epsilon2_policy: tuple = ("largest_gap",)
    epsilon2_floor: float | None = None
    seed: RngSeed = RngSeed(0)
    solver: SolverOptions = SolverOptions()
    phi_scale: float = 1.0
    psi_scale: float = 1.0

    def __post_init__(self):
        require(0.0 < self.gamma <= 1.0, "gamma must be in (0, 1]")
        require(self.m >= 1, "m must be at least 1")
        require(self.q >= 0, "q must be nonnegative")
        require(self.phi_scale > 0 and self.psi_scale > 0, "scales must be positive")


@dataclass(frozen=True)
class RacosIParams:
    """Inputs of the incomplete-data detector.

    trim_rho = None disables trimming.  residual_floor overrides the detection
    floor absolutely; otherwise the floor is residual_floor_rel *
    ||Y1||_F / sqrt(#cols of Y1), a relative stand-in for the exact
    nonzero-residual test, which is meaningless in floating point.
    """

    gamma1: float
    gamma2: float
    lambda_policy: tuple = ("fixed", 0.4)
    trim_rho: float | None = None
    residual_floor: float | None = None
    residual_floor_rel: float = 1e-8
    seed: RngSeed = RngSeed(0)
    solver: SolverOptions = SolverOptions()

    def __post_init__(self):
        require(0.0 < self.gamma1 <= 1.0, "gamma1 must be in (0, 1]")
        require(0.0 < self.gamma2 <= 1.0, "gamma2 must be in (0, 1]")
        if self.trim_rho is not None:
            require(0.0 < self.trim_rho <= 1.0, "trim_rho must be in (0, 1]")


@dataclass
class OutlierReport:
    estimated_outliers: ColumnSet
    residuals: np.ndarray
    epsilon2_used: float
    subspace_rank: int
    sampled_columns: ColumnSet
    sampled_rows: ColumnSet | None
    measurement_count: int
    solver_stats: dict
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "estimated_outliers": self.estimated_outliers.to_list(),
            "residuals": [float(z) for z in self.residuals],
            "epsilon2_used": self.epsilon2_used,
            "subspace_rank": self.subspace_rank,
            "sampled_columns": self.sampled_columns.to_list(),
            "sampled_rows": None if self.sampled_rows is None else self.sampled_rows.to_list(),
            "measurement_count": self.measurement_count,
            "solver_stats": self.solver_stats,
            "flags": self.flags,
        }


def select_epsilon2(residuals, policy: tuple, floor: float) -> float:
    """Pick the detection threshold from the per-column residuals.

    largest_gap places the threshold at the midpoint of the largest gap in the
    descending-sorted residuals, unless every residual sits below the floor,
    in which case the floor itself is returned (empty detection).  The oracle
    policy uses the true outlier set and fails when the residuals do not
    separate.
    """
    z = np.asarray(residuals, dtype=float)
    require(z.size > 0, "residuals must be nonempty")
    require(floor >= 0.0, "floor must be nonnegative")
    kind = policy[0]
    if kind == "fixed":
        return float(policy[1])
    if kind == "largest_gap":
        if float(z.max()) < floor or z.size < 2:
            return floor
        s = np.sort(z)[::-1]
        gaps = s[:-1] - s[1:]
        i = int(np.argmax(gaps))
        return float(0.5 * (s[i] + s[i + 1]))
    if kind == "oracle":
        truth = np.asarray(
            policy[1].indices if isinstance(policy[1], ColumnSet) else policy[1], dtype=int
        )
        require(0 < truth.size < z.size, "oracle policy needs both inliers and outliers")
        inlier = np.setdiff1d(np.arange(z.size), truth)
        lo = float(z[inlier].max())
        hi = float(z[truth].min())
        if hi <= lo:
            raise NoSeparation(f"inlier max {lo:.3e} >= outlier min {hi:.3e}")
        return 0.5 * (lo + hi)
    raise InvalidInput(f"unknown epsilon2 policy {policy!r}")


def separation_success(residuals, truth: ColumnSet) -> bool:
    """True when every true outlier residual strictly exceeds every inlier residual."""
    z = np.asarray(residuals, dtype=float)
    idx = truth.indices
    require(0 < idx.size < z.size, "criterion needs both inliers and outliers")
    require(truth.n == z.size, "truth ambient size disagrees with residuals")
    inlier = np.setdiff1d(np.arange(z.size), idx)
    return float(z[idx].min()) > float(z[inlier].max())


def _resolve_lambda_n(policy: tuple, n2_sub: int) -> float:
    if policy[0] == "fixed":
        return float(policy[1])
    if policy[0] == "theory":
        _, r, mu_v = policy
        return lambda_op_theory(n2_sub, r, mu_v)
    raise InvalidInput(f"unknown lambda policy {policy!r}")


def _resolve_lambda_i(policy: tuple, n2_sub: int) -> float:
    if policy[0] == "fixed":
        return float(policy[1])
    if policy[0] == "theory":
        kwargs = dict(policy[1])
        kwargs.setdefault("size_count", n2_sub)
        return lambda_mp_theory(**kwargs)
    raise InvalidInput(f"unknown lambda policy {policy!r}")


def _resolve_alpha(policy: tuple, svd, gamma: float, n1: int, n2: int, scale: float) -> float:
    kind = policy[0]
    if kind == "fixed":
        return float(policy[1])
    if kind == "energy":
        if svd.rank == 0:
            return 0.0
        return alpha_from_energy_fraction(svd, float(policy[1]))
    if kind == "noise_window":
        sigma = float(policy[1])
        delta = float(policy[2]) if len(policy) > 2 else 0.1
        lo, hi = alpha_window_gaussian(n1=n1, n2=n2, gamma=gamma, sigma=sigma, delta=delta)
        # geometric midpoint of the admissible window, at measurement scale
        return float(np.sqrt(lo * hi)) * scale
    raise InvalidInput(f"unknown alpha policy {policy!r}")


def racos_n(m, params: RacosNParams) -> OutlierReport:
    """Two-step noisy detector.

    Stage 1 solves the noisy decomposition on a column subsample of the
    row-compressed matrix and hard-thresholds the low-rank estimate's spectrum.
    Stage 2 scores all columns of the compressed matrix by their residual
    outside the estimated subspace, optionally through a second Gaussian
    reduction, and thresholds the scores.

    When params.m equals the number of rows, the row compression is skipped
    (identity embedding): this is the full-width configuration and mirrors the
    cost of operating on the raw matrix.
    """
    mat = as_matrix(m)
    n1, n2 = mat.shape
    require(params.m <= n1, "m cannot exceed the number of rows")
    seed = params.seed

    if params.m == n1:
        phi_m = mat if params.phi_scale == 1.0 else params.phi_scale * mat
    else:
        phi = gaussian_jl(params.m, n1, seed.derive("phi"))
        if params.phi_scale != 1.0:
            phi = phi * params.phi_scale
        phi_m = phi @ mat

    cols = bernoulli_select(n2, params.gamma, seed.derive("columns"))
    if cols.size == 0:
        raise EmptySample("column subsample is empty")
    y1 = phi_m[:, cols.indices]

    lam = _resolve_lambda_n(params.lambda_policy, cols.size)
    if params.epsilon1_noise_sigma is not None:
        eps1 = params.epsilon1_noise_sigma * np.sqrt(n1 * cols.size) * params.phi_scale
    else:
        eps1 = params.epsilon1 * params.phi_scale
    solved = outlier_pursuit_noisy(y1, lam, eps1, params.solver)

    svd_l = compact_svd(solved.l_hat)
    alpha = _resolve_alpha(params.alpha_policy, svd_l, params.gamma, n1, n2, params.phi_scale)
    keep = svd_l.sigma > alpha
    basis = svd_l.u[:, keep]

    projected = project_complement(basis, phi_m)
    if params.q > 0:
        psi = gaussian_jl(params.q, params.m, seed.derive("psi"))
        if params.psi_scale != 1.0:
            psi = psi * params.psi_scale
        projected = psi @ projected
    residuals = np.linalg.norm(projected, axis=0)

    floor = params.epsilon2_floor
    if floor is None:
        floor = 1e-9 * max(1.0, float(np.median(residuals)))
    eps2 = select_epsilon2(residuals, params.epsilon2_policy, floor)
    outliers = ColumnSet(n2, np.nonzero(residuals > eps2)[0])

    if params.q > 0:
        measurements = params.m * cols.size + params.q * n2
    else:
        # identity second stage reads the whole compressed matrix once
        measurements = params.m * n2

    return OutlierReport(
        estimated_outliers=outliers,
        residuals=residuals,
        epsilon2_used=float(eps2),
        subspace_rank=int(basis.shape[1]),
        sampled_columns=cols,
        sampled_rows=None,
        measurement_count=int(measurements),
        solver_stats=solved.summary(),
        flags={"lambda": lam, "alpha": float(alpha), "epsilon1": float(eps1)},
    )


def _restricted_residual(x: np.ndarray, span: np.ndarray) -> tuple[float, int]:
    """Norm of x outside the column space of span, plus that space's rank."""
    if span.size == 0:
        return float(np.linalg.norm(x)), 0
    u, s, _ = np.linalg.svd(span, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return float(np.linalg.norm(x)), 0
    r = int(np.count_nonzero(s > 1e-12 * s[0]))
    q = u[:, :r]
    return float(np.linalg.norm(x - q @ (q.T @ x))), r


def racos_i(m: MaskedMatrix, params: RacosIParams) -> OutlierReport:
    """Two-step detector for partially observed data.

    Stage 1 solves the masked decomposition on a row/column subsample
    (optionally trimmed).  Stage 2 scores each column by projecting its
    observed entries onto the orthogonal complement of the row-restricted
    column space of the low-rank estimate.  Columns with no observed entries
    in the sampled rows score 0 and are flagged unobservable; columns whose
    restriction drops rank are flagged rank_deficient.
    """
    require(m.mask.count > 0, "mask is empty")
    n1, n2 = m.shape
    seed = params.seed

    rows = bernoulli_select(n1, params.gamma1, seed.derive("rows"))
    cols = bernoulli_select(n2, params.gamma2, seed.derive("columns"))
    if rows.size == 0:
        raise EmptySample("row subsample is empty")
    if cols.size == 0:
        raise EmptySample("column subsample is empty")

    sub_vals = m.values[rows.indices, :]
    sub_obs = m.mask.observed[rows.indices, :]
    y1 = MaskedMatrix(
        values=sub_vals[:, cols.indices],
        mask=ObservationMask(sub_obs[:, cols.indices]),
    )
    if params.trim_rho is not None:
        y1 = trim_columns(y1, params.trim_rho, rows.size, seed.derive("trim"))

    lam = _resolve_lambda_i(params.lambda_policy, cols.size)
    solved = manipulator_pursuit(y1, lam, params.solver)

    svd_l = compact_svd(solved.l_hat)
    r_hat = svd_l.rank
    scaled_u = svd_l.u * svd_l.sigma  # columns span the estimate's column space

    residuals = np.zeros(n2)
    unobservable: list[int] = []
    rank_deficient: list[int] = []
    for j in range(n2):
        idx = np.nonzero(sub_obs[:, j])[0]
        if idx.size == 0:
            unobservable.append(j)
            continue
        x = sub_vals[idx, j]
        z, rank_j = _restricted_residual(x, scaled_u[idx, :])
        residuals[j] = z
        if rank_j < r_hat:
            rank_deficient.append(j)

    floor = params.residual_floor
    if floor is None:
        floor = params.residual_floor_rel * float(np.linalg.norm(y1.values)) / np.sqrt(cols.size)
    outliers = ColumnSet(n2, np.nonzero(residuals > floor)[0])

    return OutlierReport(
        estimated_outliers=outliers,
        residuals=residuals,
        epsilon2_used=float(floor),
        subspace_rank=r_hat,
        sampled_columns=cols,
        sampled_rows=rows,
        measurement_count=int(sub_obs.sum()),
        solver_stats=solved.summary(),
        flags={
            "lambda": lam,
            "unobservable": unobservable,
            "rank_deficient": rank_deficient,
        },
    )
