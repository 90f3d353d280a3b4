"""Randomized measurement operators: Gaussian embeddings, Bernoulli selectors, masks, trimming.

Every draw is a pure function of an explicit RngSeed, so identical seeds
reproduce identical outputs bit for bit and trials can be scheduled in any
order without changing results.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import require
from .linalg import MaskedMatrix, ObservationMask


@dataclass(frozen=True)
class RngSeed:
    """Deterministic RNG address: a base entropy value plus a derived stream id."""

    base: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.base, spawn_key=(self.stream,))
        return np.random.default_rng(seq)

    def derive(self, *labels) -> "RngSeed":
        """New seed whose stream hashes this stream together with the labels.

        Labels may be ints or strings (e.g. trial index, stage name); the hash
        is stable across runs and platforms.
        """
        h = hashlib.blake2b(digest_size=8)
        h.update(self.stream.to_bytes(8, "little", signed=False))
        for lab in labels:
            h.update(str(lab).encode())
            h.update(b"\x1f")
        return RngSeed(self.base, int.from_bytes(h.digest(), "little"))


@dataclass(frozen=True)
class ColumnSet:
    """Sorted unique indices out of an ambient range [0, n)."""

    n: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=int))
        require(self.n >= 0, "ambient size must be nonnegative")
        if idx.size:
            require(0 <= int(idx[0]) and int(idx[-1]) < self.n, "index out of range")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def to_list(self) -> list[int]:
        return [int(i) for i in self.indices]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ColumnSet)
            and self.n == other.n
            and np.array_equal(self.indices, other.indices)
        )

    def membership(self) -> np.ndarray:
        mem = np.zeros(self.n, dtype=bool)
        mem[self.indices] = True
        return mem


def gaussian_jl(m: int, n: int, seed: RngSeed) -> np.ndarray:
    """m x n matrix of iid N(0, 1/m) entries, so E||Phi v||^2 = ||v||^2."""
    require(m >= 1 and n >= 1, "dimensions must be positive")
    rng = seed.generator()
    return rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, n))


def jl_tail_constant(epsilon: float) -> float:
    """Gaussian-ensemble exponent eps^2/4 - eps^3/6 in the norm-preservation tail bound."""
    require(0.0 < epsilon < 1.0, "epsilon must be in (0, 1)")
    return epsilon**2 / 4.0 - epsilon**3 / 6.0


def bernoulli_select(n: int, gamma: float, seed: RngSeed) -> ColumnSet:
    """Each index of [0, n) kept independently with probability gamma."""
    require(0.0 <= gamma <= 1.0, "gamma must be in [0, 1]")
    require(n >= 0, "n must be nonnegative")
    rng = seed.generator()
    keep = rng.random(n) < gamma
    return ColumnSet(n=n, indices=np.nonzero(keep)[0])


def selector_matrix(cols: ColumnSet, as_rows: bool = False) -> np.ndarray:
    """0/1 selector: identity columns (or rows) at the chosen indices."""
    eye = np.eye(cols.n)
    return eye[cols.indices, :] if as_rows else eye[:, cols.indices]


def sample_mask(n1: int, n2: int, p: float, seed: RngSeed) -> ObservationMask:
    """Each cell observed independently with probability p."""
    require(0.0 < p <= 1.0, "p must be in (0, 1]")
    rng = seed.generator()
    return ObservationMask(rng.random((n1, n2)) < p)


def trim_columns(y: MaskedMatrix, rho: float, m: int, seed: RngSeed) -> MaskedMatrix:
    """Cap every column at ceil(rho*m) observed entries, dropping a uniform random excess.

    Columns already at or below the cap are returned unchanged; retained cells
    keep their values.
    """
    require(0.0 < rho <= 1.0, "rho must be in (0, 1]")
    require(y.shape[0] == m, "row count disagrees with m")
    cap = math.ceil(rho * m)
    require(cap >= 1, "rho*m must be at least 1")
    rng = seed.generator()
    observed = y.mask.observed.copy()
    for j in range(observed.shape[1]):
        rows = np.nonzero(observed[:, j])[0]
        if rows.size > cap:
            keep = rng.choice(rows, size=cap, replace=False)
            observed[:, j] = False
            observed[keep, j] = True
    mask = ObservationMask(observed)
    return MaskedMatrix(values=np.where(observed, y.values, 0.0), mask=mask)
