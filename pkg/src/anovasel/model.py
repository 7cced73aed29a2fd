"""Sparsity patterns and the Gaussian sequence-space observations.

Observations X_l = eta_u theta_l(u) + eps xi_l are realized lazily, only on the
coordinates a caller asks for; the noise xi_l is a pure function of
(seed, stream, rank of u, l), see :mod:`anovasel.rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, MissingObservationError
from .lattice import binom, check_subset, enumerate_subsets, log_binom, subset_rank
from .rng import STREAM_NOISE, STREAM_PATTERN, STREAM_VECTOR, RandomSource, pack_lattice


@dataclass(frozen=True)
class SparsityPattern:
    d: int
    k: int
    active: frozenset

    @classmethod
    def from_subsets(cls, d: int, k: int, subsets: Iterable[Sequence[int]]) -> "SparsityPattern":
        act = [check_subset(u, d) for u in subsets]
        if any(len(u) != k for u in act):
            raise InvalidArgumentError(f"all active subsets must have size k={k}")
        if len(set(act)) != len(act):
            raise InvalidArgumentError("duplicate subsets in pattern")
        return cls(d, k, frozenset(act))

    def __len__(self):
        return len(self.active)

    def eta(self, subsets: Sequence[tuple]) -> np.ndarray:
        return np.array([u in self.active for u in subsets], dtype=np.int8)

    @property
    def beta(self) -> float:
        return sparsity_index(self.d, self.k, len(self.active))


def sparsity_index(d: int, k: int, n_active: int) -> float:
    """beta = 1 - log(n_active) / log C(d, k)."""
    if not 1 <= n_active <= binom(d, k):
        raise InvalidArgumentError(f"n_active={n_active} outside [1, C({d},{k})]")
    lc = log_binom(d, k)
    if lc == 0:
        return 1.0
    return 1.0 - math.log(n_active) / lc


def active_count(d: int, k: int, beta: float) -> int:
    """floor(C(d, k)^(1 - beta))."""
    if not 0 < beta < 1:
        raise InvalidArgumentError("beta must lie in (0, 1)")
    x = math.exp((1 - beta) * log_binom(d, k))
    # absorb round-off just below an integer
    return max(1, int(math.floor(x * (1 + 1e-12))))


def sample_pattern(d: int, k: int, beta: float, rng: RandomSource) -> SparsityPattern:
    """Uniformly random pattern with active_count(d, k, beta) active subsets."""
    subsets = enumerate_subsets(d, k)
    n = active_count(d, k, beta)
    ranks = np.array([subset_rank(u) for u in subsets], dtype=np.uint64)
    keys = rng.substream((rng.stream << 2) | STREAM_PATTERN).uniforms(ranks, np.uint64(0))
    chosen = np.argsort(keys, kind="stable")[:n]
    return SparsityPattern(d, k, frozenset(subsets[i] for i in chosen))


# components used in the bivariate simulation, in order u_1, ..., u_10
REFERENCE_FACTORS = [("g1", "g2"), ("g1", "g3"), ("g1", "g4"), ("g1", "g5"), ("g2", "g3"),
                     ("g2", "g4"), ("g2", "g5"), ("g3", "g4"), ("g3", "g5"), ("g4", "g5")]


def reference_subsets(d: int) -> list[tuple]:
    """The ten active pairs u_1..u_10 of the bivariate study.

    u_1..u_9 are {1, j} for j = 2..10.  The tenth pair is {1, 11} when d >= 11;
    for d = 10 it is {2, 3} because {2, 1} would duplicate u_1.
    """
    if d < 10:
        raise InvalidArgumentError("the reference pattern needs d >= 10")
    subsets = [(1, j) for j in range(2, 11)]
    subsets.append((1, 11) if d >= 11 else (2, 3))
    return subsets


def fixed_pattern(d: int) -> SparsityPattern:
    return SparsityPattern.from_subsets(d, 2, reference_subsets(d))


@dataclass(frozen=True)
class ObservationSet:
    """Realized X_l on the grid ``subsets x ells``; ``values[i, j]`` is X at (subsets[i], ells[j])."""

    subsets: tuple
    ells: np.ndarray
    values: np.ndarray
    eps: float
    seed: int
    stream: int = 0
    _row: dict = field(default=None, repr=False, compare=False)
    _col: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_row", {u: i for i, u in enumerate(self.subsets)})
        object.__setattr__(self, "_col", {int(p): j for j, p in enumerate(pack_lattice(self.ells))})
        self.values.setflags(write=False)

    def row(self, u) -> np.ndarray:
        try:
            return self.values[self._row[tuple(u)]]
        except KeyError:
            raise MissingObservationError(f"subset {u} was not observed") from None

    def columns(self, ells) -> np.ndarray:
        """Column positions of ``ells``; raises if any coordinate was not realized."""
        try:
            return np.array([self._col[int(p)] for p in pack_lattice(ells)], dtype=np.intp)
        except KeyError as exc:
            raise MissingObservationError(f"lattice coordinate (packed {exc.args[0]}) not realized") from None

    def at(self, u, ells) -> np.ndarray:
        return self.row(u)[self.columns(ells)]


def observe(signal, pattern: SparsityPattern, eps: float, rng: RandomSource,
            subsets: Sequence[tuple], ells) -> ObservationSet:
    """Realize X_l = eta_u theta_l(u) + eps xi_l on ``subsets x ells``.

    ``signal`` maps a subset to a Fourier table (anything with ``theta(ells)``);
    subsets missing from it have zero coefficients.
    """
    if eps < 0:
        raise InvalidArgumentError("eps must be nonnegative")
    subsets = tuple(tuple(u) for u in subsets)
    ells = np.asarray(ells, dtype=np.int64)
    if ells.ndim == 1:
        ells = ells[:, None]
    vals = np.zeros((len(subsets), len(ells)))
    if eps > 0:
        ranks = [subset_rank(u) for u in subsets]
        src = rng.substream((rng.stream << 2) | STREAM_NOISE)
        vals += eps * src.lattice_normals(ranks, ells)
    for i, u in enumerate(subsets):
        if u in pattern.active and u in signal:
            vals[i] += signal[u].theta(ells)
    return ObservationSet(subsets, ells, vals, eps, rng.seed, rng.stream)


def vector_observe(mu: float, pattern: SparsityPattern, rng: RandomSource) -> dict:
    """X_u = mu eta_u + standard normal noise, for every subset u."""
    if mu < 0:
        raise InvalidArgumentError("mu must be nonnegative")
    subsets = enumerate_subsets(pattern.d, pattern.k)
    ranks = np.array([subset_rank(u) for u in subsets], dtype=np.uint64)
    src = rng.substream((rng.stream << 2) | STREAM_VECTOR)
    x = src.normals(ranks, np.uint64(0)) + mu * pattern.eta(subsets)
    return dict(zip(subsets, x.tolist()))
