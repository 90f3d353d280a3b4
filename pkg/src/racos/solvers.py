"""Convex programs for low-rank + column-sparse decomposition.

Both programs minimize  ||L||_* + lambda * ||C||_{1,2}  subject to a data-fit
constraint: a Frobenius ball around Y for noisy full observations, or exact
agreement on the observed cells for incomplete observations.  They share one
ADMM loop over the splitting L + C + E = Y, where E carries the slack: it is
confined to the Frobenius ball of radius eps1 in the noisy program and to the
unobserved cells in the masked program.  Each block update is a closed-form
proximal step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import require
from .linalg import MaskedMatrix, as_matrix


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 2000
    primal_tolerance: float = 1e-6
    dual_tolerance: float = 1e-6
    admm_penalty: float = 1.0
    verbose: bool = False

    def __post_init__(self):
        require(self.max_iters >= 1, "max_iters must be at least 1")
        require(self.primal_tolerance > 0, "primal_tolerance must be positive")
        require(self.dual_tolerance > 0, "dual_tolerance must be positive")
        require(self.admm_penalty > 0, "admm_penalty must be positive")


@dataclass
class DecompositionResult:
    l_hat: np.ndarray
    c_hat: np.ndarray
    iterations: int
    final_primal_residual: float
    final_dual_residual: float
    objective: float
    converged: bool
    # merit history (primal + dual residual per iteration), kept for diagnostics
    residual_history: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_primal_residual": self.final_primal_residual,
            "final_dual_residual": self.final_dual_residual,
            "objective": self.objective,
            "converged": self.converged,
        }


def prox_nuclear(m, tau: float) -> np.ndarray:
    """Soft-threshold the singular values by tau, keeping the singular vectors."""
    a = as_matrix(m)
    require(tau >= 0.0, "tau must be nonnegative")
    if tau == 0.0:
        return a.copy()
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    keep = s > 0.0
    if not keep.any():
        return np.zeros_like(a)
    return (u[:, keep] * s[keep]) @ vt[keep, :]


def prox_l12(m, tau: float) -> np.ndarray:
    """Shrink each column toward zero: c -> c * max(1 - tau/||c||, 0)."""
    a = as_matrix(m)
    require(tau >= 0.0, "tau must be nonnegative")
    if tau == 0.0:
        return a.copy()
    nrm = np.linalg.norm(a, axis=0)
    scale = np.zeros_like(nrm)
    nz = nrm > 0
    scale[nz] = np.maximum(1.0 - tau / nrm[nz], 0.0)
    return a * scale


def _zero_result(y: np.ndarray) -> DecompositionResult:
    z = np.zeros_like(y)
    return DecompositionResult(
        l_hat=z,
        c_hat=z.copy(),
        iterations=0,
        final_primal_residual=0.0,
        final_dual_residual=0.0,
        objective=0.0,
        converged=True,
    )


def _admm(y: np.ndarray, lam: float, project_e, opts: SolverOptions) -> DecompositionResult:
    """Shared loop; project_e maps the E-block target onto its feasible set."""
    rho = opts.admm_penalty
    scale = max(1.0, float(np.linalg.norm(y)))
    l = np.zeros_like(y)
    c = np.zeros_like(y)
    e = np.zeros_like(y)
    w = np.zeros_like(y)

    history: list[float] = []
    best = None
    best_merit = math.inf
    converged = False
    it = 0
    primal = dual = math.inf
    for it in range(1, opts.max_iters + 1):
        c_old = c
        e_old = e
        l = prox_nuclear(y - c - e - w, 1.0 / rho)
        c = prox_l12(y - l - e - w, lam / rho)
        e = project_e(y - l - c - w)
        r = l + c + e - y
        w = w + r
        primal = float(np.linalg.norm(r)) / scale
        dual = rho * float(np.linalg.norm((c - c_old) + (e - e_old))) / scale
        merit = primal + dual
        history.append(merit)
        if merit < best_merit:
            best_merit = merit
            best = (l, c, primal, dual, it)
        if opts.verbose and it % 50 == 0:
            print(f"iter {it}: primal {primal:.3e} dual {dual:.3e}")
        if primal <= opts.primal_tolerance and dual <= opts.dual_tolerance:
            converged = True
            best = (l, c, primal, dual, it)
            break

    l_hat, c_hat, primal, dual, it = best
    objective = float(np.linalg.svd(l_hat, compute_uv=False).sum()) + lam * float(
        np.linalg.norm(c_hat, axis=0).sum()
    )
    return DecompositionResult(
        l_hat=l_hat,
        c_hat=c_hat,
        iterations=it,
        final_primal_residual=primal,
        final_dual_residual=dual,
        objective=objective,
        converged=converged,
        residual_history=history,
    )


def outlier_pursuit_noisy(
    y, lam: float, epsilon1: float = 0.0, opts: SolverOptions = SolverOptions()
) -> DecompositionResult:
    """Decompose y into low-rank + column-sparse parts with Frobenius slack epsilon1.

    At convergence ||y - L - C||_F <= epsilon1 + primal_tolerance * max(1, ||y||_F);
    residual tolerances are relative to that same scale.  If the iteration cap
    is hit the best iterate is returned with converged=False.
    """
    a = as_matrix(y)
    require(lam > 0, "lambda must be positive")
    require(epsilon1 >= 0, "epsilon1 must be nonnegative")
    if not a.any():
        return _zero_result(a)

    if epsilon1 == 0.0:

        def project_e(z):
            return np.zeros_like(z)

    else:

        def project_e(z):
            nrm = float(np.linalg.norm(z))
            if nrm <= epsilon1:
                return z
            return z * (epsilon1 / nrm)

    return _admm(a, lam, project_e, opts)


def manipulator_pursuit(
    y: MaskedMatrix, lam: float, opts: SolverOptions = SolverOptions()
) -> DecompositionResult:
    """Masked-equality variant: observed cells of L + C must reproduce y exactly.

    Unobserved cells of the decomposition are unconstrained.  At convergence
    ||P_observed(L + C) - y||_F <= primal_tolerance * max(1, ||y||_F).
    """
    require(lam > 0, "lambda must be positive")
    require(y.mask.count > 0, "mask is empty")
    vals = y.values
    if not vals.any():
        return _zero_result(vals)
    observed = y.mask.observed

    def project_e(z):
        return np.where(observed, 0.0, z)

    return _admm(vals, lam, project_e, opts)


def lambda_op_theory(n2_sub: int, r: int, mu_v: float) -> float:
    """Theoretical regularization weight for the noisy program at subsample width n2_sub."""
    require(n2_sub > 0 and r > 0 and mu_v > 0, "inputs must be positive")
    return 3.0 * math.sqrt(1.0 + 1024.0 * mu_v * r) / (14.0 * math.sqrt(n2_sub))


def lambda_mp_theory(
    p: float,
    k: int,
    r: int,
    mu_l: float,
    size_count: int,
    trimmed: bool = False,
    phi: float | None = None,
) -> float:
    """Theoretical regularization weight for the masked program.

    Untrimmed, size_count is the subsampled nonzero-column count and enters the
    bound through log^2(4 * size_count).  Trimmed (phi = cap/observation-rate
    ratio), size_count is the total row+column count n1 + n_L entering through
    log(size_count); the observation rate p drops out.
    """
    require(k > 0 and r > 0 and mu_l > 0 and size_count > 0, "inputs must be positive")
    if trimmed:
        require(phi is not None and phi > 0, "trimmed variant needs positive phi")
        inner = (1.0 + phi) * r * mu_l * k * math.log(size_count)
        return (1.0 / 48.0) * math.sqrt(1.0 / math.sqrt(inner))
    require(0.0 < p <= 1.0, "p must be in (0, 1]")
    return (1.0 / 48.0) * math.sqrt(p / (9.0 * k * r * mu_l * math.log(4.0 * size_count) ** 2))
