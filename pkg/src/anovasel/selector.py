"""Weighted chi-square statistics and the selectors built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .extremal import (
    ASYMPTOTIC,
    EXACT,
    WeightProfile,
    asymptotic_solution,
    profile_weights,
    solve_extremal_exact,
    solve_r_star,
)
from .lattice import EllipsoidSpec, binom, enumerate_subsets, log_binom
from .model import ObservationSet, SparsityPattern
from .rng import pack_lattice


def uniform_grid(M: int) -> tuple:
    """M equidistant points strictly inside (0, 1)."""
    return tuple((m + 1) / (M + 1) for m in range(M))


@dataclass(frozen=True)
class SelectorConfig:
    epsilon_slack: float = 0.1
    M: int = 20
    grid: tuple = None
    mode: str = ASYMPTOTIC

    def __post_init__(self):
        grid = uniform_grid(self.M) if self.grid is None else tuple(float(b) for b in self.grid)
        object.__setattr__(self, "grid", grid)
        if len(grid) != self.M:
            raise InvalidArgumentError(f"grid has {len(grid)} points but M={self.M}")
        if self.M < 1 or any(not 0 < b < 1 for b in grid) or any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
            raise InvalidArgumentError("grid must be strictly increasing inside (0, 1)")
        if not self.epsilon_slack >= 0:
            raise InvalidArgumentError("epsilon_slack must be nonnegative")
        if self.mode not in (ASYMPTOTIC, EXACT):
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")


def theoretical_slack(d: int, k: int) -> float:
    """Slack 1/log log C(d, k): tends to 0 while slack * log C(d, k) grows."""
    return 1.0 / math.log(log_binom(d, k))


def threshold(d: int, k: int, M: int, epsilon_slack: float) -> float:
    """t = sqrt((2 + slack) (log C(d, k) + log M))."""
    if M < 1:
        raise InvalidArgumentError("M must be >= 1")
    return math.sqrt((2 + epsilon_slack) * (log_binom(d, k) + math.log(M)))


def selection_target(d: int, k: int, beta: float) -> float:
    """(1 + sqrt(1 - beta)) sqrt(2 log C(d, k)), the value a(r*) must reach."""
    return (1 + math.sqrt(1 - beta)) * math.sqrt(2 * log_binom(d, k))


def profile_at(r: float, spec: EllipsoidSpec, eps: float, mode: str = ASYMPTOTIC) -> WeightProfile:
    sol = (asymptotic_solution(r, spec, eps) if mode == ASYMPTOTIC
           else solve_extremal_exact(r, spec, eps))
    return profile_weights(sol)


def build_grid_profiles(config: SelectorConfig, spec: EllipsoidSpec, d: int,
                        eps: float) -> list[WeightProfile]:
    profiles = []
    for beta in config.grid:
        r = solve_r_star(selection_target(d, spec.k, beta), spec, eps, config.mode)
        profiles.append(profile_at(r, spec, eps, config.mode))
    return profiles


class GridWeights:
    """Weights of several profiles laid out on the union of their supports.

    ``matrix[m, j]`` is the weight of profile m at ``ells[j]`` (zero outside
    its support), so all statistics for a block of subsets are one product.
    """

    def __init__(self, profiles: Sequence[WeightProfile]):
        if not profiles:
            raise InvalidArgumentError("need at least one profile")
        allpts = np.concatenate([p.support for p in profiles])
        keys = pack_lattice(allpts)
        uniq, first = np.unique(keys, return_index=True)
        pts = allpts[first]
        order = np.lexsort(pts.T[::-1])
        self.ells = np.ascontiguousarray(pts[order])
        ukeys = uniq[order]
        lookup = np.argsort(ukeys)
        self.matrix = np.zeros((len(profiles), len(self.ells)))
        for m, p in enumerate(profiles):
            pos = lookup[np.searchsorted(ukeys[lookup], pack_lattice(p.support))]
            self.matrix[m, pos] = p.weights
        self.profiles = list(profiles)

    def __len__(self):
        return self.matrix.shape[0]

    def statistics(self, x: np.ndarray, eps: float) -> np.ndarray:
        """S[i, m] = sum_l w_m(l) ((x[i, l]/eps)^2 - 1) for rows of x aligned with ``ells``."""
        z = (x / eps) ** 2 - 1.0
        return z @ self.matrix.T


@dataclass(frozen=True)
class SelectionResult:
    subsets: tuple
    statistics: np.ndarray  # (n_subsets, M)
    threshold: float
    decisions: dict = field(default=None)

    def __post_init__(self):
        if self.decisions is None:
            dec = np.max(self.statistics, axis=1) > self.threshold
            object.__setattr__(self, "decisions", {u: int(v) for u, v in zip(self.subsets, dec)})

    def selected(self) -> list:
        return [u for u in self.subsets if self.decisions[u]]

    def to_dict(self) -> dict:
        return {"threshold": self.threshold,
                "decisions": {"-".join(map(str, u)): self.decisions[u] for u in self.subsets},
                "statistics": {"-".join(map(str, u)): [float(s) for s in row]
                               for u, row in zip(self.subsets, self.statistics)}}


def statistic(obs: ObservationSet, u, w: WeightProfile, eps: float) -> float:
    x = obs.at(u, w.support)
    return float(np.dot(w.weights, (x / eps) ** 2 - 1.0))


def _as_grid(profiles) -> GridWeights:
    return profiles if isinstance(profiles, GridWeights) else GridWeights(list(profiles))


def select_adaptive(obs: ObservationSet, subsets: Sequence[tuple], profiles, threshold: float,
                    eps: float | None = None) -> SelectionResult:
    """eta_hat_u = 1 iff S_{u,m} > threshold for some grid point m."""
    grid = _as_grid(profiles)
    eps = obs.eps if eps is None else eps
    subsets = tuple(tuple(u) for u in subsets)
    cols = obs.columns(grid.ells)
    x = np.stack([obs.row(u)[cols] for u in subsets]) if subsets else np.zeros((0, len(cols)))
    return SelectionResult(subsets, grid.statistics(x, eps), threshold)


def select_known_beta(obs: ObservationSet, subsets: Sequence[tuple], profile: WeightProfile,
                      d: int, k: int, epsilon_slack: float, eps: float | None = None) -> SelectionResult:
    """Single-profile selector with threshold sqrt((2 + slack) log C(d, k))."""
    return select_adaptive(obs, subsets, [profile], threshold(d, k, 1, epsilon_slack), eps)


def vector_select(x: Mapping, d: int, k: int, kappa: float | None = None) -> dict:
    """eta*_u = 1{X_u > sqrt((2 + kappa) log C(d, k))}."""
    if kappa is None:
        kappa = theoretical_slack(d, k)
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    t = math.sqrt((2 + kappa) * log_binom(d, k))
    return {u: int(v > t) for u, v in x.items()}


def _check_keys(decisions: Mapping, pattern: SparsityPattern):
    if len(decisions) != binom(pattern.d, pattern.k) or set(decisions) != set(
            enumerate_subsets(pattern.d, pattern.k)):
        raise InvalidArgumentError("decisions must cover exactly the subsets of the pattern")


def hamming_split(decisions: Mapping, pattern: SparsityPattern) -> tuple[int, int]:
    """(false positives, false negatives)."""
    _check_keys(decisions, pattern)
    fp = sum(1 for u, v in decisions.items() if v and u not in pattern.active)
    fn = sum(1 for u in pattern.active if not decisions[u])
    return fp, fn


def hamming(decisions: Mapping, pattern: SparsityPattern) -> int:
    return sum(hamming_split(decisions, pattern))
