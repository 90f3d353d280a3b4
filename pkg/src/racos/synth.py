"""Synthetic problem generation with full ground-truth bookkeeping.

Inlier columns carry a Gaussian-factor low-rank matrix (optionally rescaled to
hit a target smallest singular value); outliers occupy the trailing columns
with iid Gaussian entries of variance r; noise is Gaussian or Laplace; masks
are iid Bernoulli.  Everything is seed-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import require
from .linalg import (
    MaskedMatrix,
    apply_mask,
    column_incoherence,
    compact_svd,
    row_incoherence,
)
from .sampling import ColumnSet, RngSeed, sample_mask


@dataclass
class SyntheticProblem:
    l: np.ndarray
    c: np.ndarray
    noise: np.ndarray | None
    mask: object | None
    m: object  # dense ndarray (noisy) or MaskedMatrix (incomplete)
    truth: ColumnSet
    meta: dict


def gen_low_rank(
    n1: int,
    n_l: int,
    k: int,
    r: int,
    sigma_r_target: float | None = None,
    seed: RngSeed = RngSeed(0),
) -> np.ndarray:
    """Rank-r Gaussian-factor matrix on the first n_l columns, zeros on the last k.

    If sigma_r_target is given the whole matrix is rescaled so its smallest
    nonzero singular value equals the target exactly.
    """
    require(1 <= r <= min(n1, n_l), "rank must satisfy 1 <= r <= min(n1, n_l)")
    require(k >= 0, "k must be nonnegative")
    rng = seed.generator()
    u = rng.normal(size=(n1, r))
    v = rng.normal(size=(n_l, r))
    l = np.zeros((n1, n_l + k))
    l[:, :n_l] = u @ v.T
    if sigma_r_target is not None:
        require(sigma_r_target > 0, "sigma_r_target must be positive")
        s = np.linalg.svd(l, compute_uv=False)
        l *= sigma_r_target / s[r - 1]
    return l


def gen_outliers(n1: int, n_l: int, k: int, r: int, seed: RngSeed = RngSeed(0)) -> np.ndarray:
    """Zero on the first n_l columns; iid N(0, r) entries on the trailing k."""
    require(k >= 0 and n_l >= 0 and r >= 1, "bad outlier dimensions")
    c = np.zeros((n1, n_l + k))
    if k > 0:
        rng = seed.generator()
        c[:, n_l:] = rng.normal(0.0, np.sqrt(r), size=(n1, k))
    return c


def gen_noise(n1: int, n2: int, kind: tuple, seed: RngSeed = RngSeed(0)) -> np.ndarray:
    """iid noise matrix; kind is ("gaussian", sigma) or ("laplace", scale)."""
    name, param = kind
    require(param >= 0, "noise parameter must be nonnegative")
    if param == 0:
        return np.zeros((n1, n2))
    rng = seed.generator()
    if name == "gaussian":
        return rng.normal(0.0, param, size=(n1, n2))
    if name == "laplace":
        return rng.laplace(0.0, param, size=(n1, n2))
    require(False, f"unknown noise kind {name!r}")


def eta_n(noise: np.ndarray) -> float:
    """Largest column Euclidean norm of the noise matrix."""
    return float(np.linalg.norm(noise, axis=0).max())


def _meta(l: np.ndarray, noise: np.ndarray | None, noise_kind, p, k: int, seed: RngSeed) -> dict:
    svd = compact_svd(l)
    ci = column_incoherence(l)
    ri = row_incoherence(l)
    return {
        "r": svd.rank,
        "k": k,
        "n_l": ci.n_l,
        "mu_v": ci.mu_v,
        "mu_u": ri.mu_u,
        "sigma_r_l": float(svd.sigma[-1]) if svd.rank else 0.0,
        "eta_n": eta_n(noise) if noise is not None else 0.0,
        "noise_kind": list(noise_kind) if noise_kind else None,
        "p": p,
        "seed": [seed.base, seed.stream],
    }


def assemble(
    kind: str,
    l: np.ndarray,
    c: np.ndarray,
    noise: np.ndarray | None = None,
    p: float | None = None,
    noise_kind: tuple | None = None,
    seed: RngSeed = RngSeed(0),
    shuffle: bool = False,
) -> SyntheticProblem:
    """Combine the parts into an observed problem with recomputable metadata.

    kind "noisy" forms l + c + noise; kind "incomplete" samples a Bernoulli(p)
    mask over l + c.  The optional shuffle permutes columns (ground truth
    follows); off by default so outliers stay in the trailing block.
    """
    require(l.shape == c.shape, "l and c dimensions disagree")
    n1, n2 = l.shape
    truth_idx = np.nonzero(np.linalg.norm(c, axis=0) > 0)[0]

    if shuffle:
        perm = seed.derive("shuffle").generator().permutation(n2)
        l = l[:, perm]
        c = c[:, perm]
        if noise is not None:
            noise = noise[:, perm]
        truth_idx = np.nonzero(np.linalg.norm(c, axis=0) > 0)[0]

    truth = ColumnSet(n2, truth_idx)
    k = truth.size

    if kind == "noisy":
        n = noise if noise is not None else np.zeros_like(l)
        require(n.shape == l.shape, "noise dimensions disagree")
        m = l + c + n
        return SyntheticProblem(
            l=l, c=c, noise=noise, mask=None, m=m, truth=truth,
            meta=_meta(l, noise, noise_kind, None, k, seed),
        )
    if kind == "incomplete":
        require(p is not None and 0 < p <= 1, "incomplete assembly needs p in (0, 1]")
        mask = sample_mask(n1, n2, p, seed.derive("mask"))
        masked = apply_mask(l + c, mask)
        return SyntheticProblem(
            l=l, c=c, noise=None, mask=mask, m=masked, truth=truth,
            meta=_meta(l, None, None, p, k, seed),
        )
    require(False, f"unknown assembly kind {kind!r}")


def make_noisy_problem(
    n1: int,
    n2: int,
    k: int,
    r: int,
    seed: RngSeed,
    sigma_r: float | None = None,
    noise: tuple = ("gaussian", 0.0),
    shuffle: bool = False,
) -> SyntheticProblem:
    """One-call noisy instance: low-rank inliers, trailing outliers, iid noise."""
    n_l = n2 - k
    l = gen_low_rank(n1, n_l, k, r, sigma_r, seed.derive("low_rank"))
    c = gen_outliers(n1, n_l, k, r, seed.derive("outliers"))
    n = gen_noise(n1, n2, noise, seed.derive("noise"))
    return assemble("noisy", l, c, n, noise_kind=noise, seed=seed, shuffle=shuffle)


def make_incomplete_problem(
    n1: int,
    n2: int,
    k: int,
    r: int,
    p: float,
    seed: RngSeed,
    sigma_r: float | None = None,
    shuffle: bool = False,
) -> SyntheticProblem:
    """One-call incomplete instance: Bernoulli(p) mask over inliers + outliers."""
    n_l = n2 - k
    l = gen_low_rank(n1, n_l, k, r, sigma_r, seed.derive("low_rank"))
    c = gen_outliers(n1, n_l, k, r, seed.derive("outliers"))
    return assemble("incomplete", l, c, p=p, seed=seed, shuffle=shuffle)


def estimate_eta_n(n1: int, n2: int, noise: tuple, seed: RngSeed, draws: int = 32) -> float:
    """Mean max-column-norm of the noise law over seeded draws (for rescaled axes)."""
    vals = [eta_n(gen_noise(n1, n2, noise, seed.derive("eta", i))) for i in range(draws)]
    return float(np.mean(vals))


def estimate_mu_v(
    n1: int, n2: int, k: int, r: int, seed: RngSeed, draws: int = 32
) -> float:
    """Mean column incoherence of the low-rank generator (for rescaled axes)."""
    vals = []
    for i in range(draws):
        l = gen_low_rank(n1, n2 - k, k, r, None, seed.derive("mu", i))
        vals.append(column_incoherence(l).mu_v)
    return float(np.mean(vals))
