"""Subsets of variables, frequency lattices without zero coordinates, and
Sobolev coefficients.

Lattice indices are handled in bulk as integer arrays of shape ``(n, k)``;
a single index is a tuple (or 1-D array) of ``k`` nonzero integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InvalidArgumentError, ResourceLimitError

SubsetIndex = tuple  # sorted tuple of k distinct 1-based variable indices

DEFAULT_POINT_BUDGET = 10_000_000


@dataclass(frozen=True)
class EllipsoidSpec:
    k: int
    sigma: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgumentError(f"k must be a positive integer, got {self.k}")
        if not self.sigma > 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")

    @property
    def c_min(self) -> float:
        """Smallest Sobolev coefficient over the lattice, attained at |l_i| = 1."""
        return (2 * math.pi) ** self.sigma * self.k ** (self.sigma / 2)

    @property
    def r_max(self) -> float:
        """Supremum of radii r for which the ellipsoid minus the r-ball is nonempty."""
        return 1.0 / self.c_min


def log_binom(d: int, k: int) -> float:
    return float(gammaln(d + 1) - gammaln(k + 1) - gammaln(d - k + 1))


def binom(d: int, k: int) -> int:
    return math.comb(d, k)


def enumerate_subsets(d: int, k: int) -> list[SubsetIndex]:
    """All k-subsets of {1, ..., d} in lexicographic order."""
    if k < 1 or k > d:
        raise InvalidArgumentError(f"need 1 <= k <= d, got d={d}, k={k}")
    return list(itertools.combinations(range(1, d + 1), k))


def check_subset(u: Sequence[int], d: int | None = None) -> SubsetIndex:
    u = tuple(int(j) for j in u)
    if any(b <= a for a, b in zip(u, u[1:])):
        raise InvalidArgumentError(f"subset must be strictly increasing: {u}")
    if not u or u[0] < 1 or (d is not None and u[-1] > d):
        raise InvalidArgumentError(f"subset {u} out of range for d={d}")
    return u


def subset_rank(u: Sequence[int]) -> int:
    """Colexicographic rank of a subset; does not depend on d."""
    return sum(math.comb(j - 1, i + 1) for i, j in enumerate(u))


def sobolev_coefficient(ell, spec: EllipsoidSpec):
    """c_l = (sum_i (2 pi l_i)^2)^(sigma/2).

    Accepts one index (returns a float) or an ``(n, k)`` array (returns an array).
    """
    arr = np.asarray(ell, dtype=float)
    sq = (2 * np.pi) ** 2 * np.sum(arr * arr, axis=-1)
    out = sq ** (spec.sigma / 2)
    return float(out) if np.ndim(out) == 0 else out


def support_radius(r: float, spec: EllipsoidSpec) -> float:
    """Euclidean radius outside which the asymptotic extremal profile vanishes."""
    k, s = spec.k, spec.sigma
    return (1 + 4 * s / k) ** (1 / (2 * s)) / (2 * np.pi * r ** (1 / s))


def _axis_values(radius: float) -> np.ndarray:
    m = math.ceil(radius) - 1
    pos = np.arange(1, m + 1, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def enumerate_ball(spec: EllipsoidSpec, radius: float,
                   budget: int = DEFAULT_POINT_BUDGET) -> np.ndarray:
    """All l in (Z minus 0)^k with ||l|| < radius, lexicographically ordered.

    Returns an int64 array of shape ``(n, k)``.  Raises ResourceLimitError when
    more than ``budget`` points would be materialized.
    """
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    r2 = radius * radius
    vals = _axis_values(radius)
    pts = vals[:, None]
    norms = pts[:, 0] ** 2
    # every later coordinate adds at least 1 to the squared norm
    keep = norms + (spec.k - 1) < r2
    pts, norms = pts[keep], norms[keep]
    for j in range(2, spec.k + 1):
        n_new = len(pts) * len(vals)
        if n_new > 4 * budget:
            raise ResourceLimitError(
                f"ball of radius {radius:g} in dimension {spec.k} exceeds budget {budget}")
        nxt = np.tile(vals, len(pts))
        norms = np.repeat(norms, len(vals)) + nxt ** 2
        keep = norms + (spec.k - j) < r2
        pts = np.column_stack([np.repeat(pts, len(vals), axis=0)[keep], nxt[keep]])
        norms = norms[keep]
        if len(pts) > budget:
            raise ResourceLimitError(
                f"ball of radius {radius:g} in dimension {spec.k} exceeds budget {budget}")
    return np.ascontiguousarray(pts, dtype=np.int64)
