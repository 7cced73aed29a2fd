"""The extremal problem on a Sobolev ellipsoid with a small ball removed.

Minimizing sum(theta^4) subject to sum(theta^2 c^2) <= 1 and sum(theta^2) >= r^2
gives the profile theta_l^2 = a0^2 (1 - (c_l/T)^2)_+.  The value
a(r) = sqrt(sum(theta^4) / 2) / eps^2 calibrates both the weights of the
chi-square statistics and the selection boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import EmptyEllipsoidError, InvalidArgumentError, NumericError, OutOfRangeError
from .lattice import DEFAULT_POINT_BUDGET, EllipsoidSpec, enumerate_ball, sobolev_coefficient, support_radius

FIXED_K = "fixed-k"
GROWING_K = "growing-k"
EXACT = "exact"
ASYMPTOTIC = "asymptotic"


def _readonly(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ExtremalSolution:
    """A theta*^2 profile on a finite support, with the parameters that define it.

    ``mode`` records whether the profile solves the lattice problem exactly or
    comes from the closed-form asymptotics.
    """

    r: float
    eps: float
    spec: EllipsoidSpec
    a0_sq: float
    T: float
    support: np.ndarray
    theta_sq: np.ndarray
    a_value: float
    mode: str = EXACT

    def __post_init__(self):
        object.__setattr__(self, "support", _readonly(self.support))
        object.__setattr__(self, "theta_sq", _readonly(self.theta_sq))

    def residuals(self) -> tuple[float, float]:
        """(relative error of sum theta^2 vs r^2, error of sum c^2 theta^2 vs 1)."""
        c2 = sobolev_coefficient(self.support, self.spec) ** 2
        return (abs(self.theta_sq.sum() - self.r ** 2) / self.r ** 2,
                abs(np.dot(c2, self.theta_sq) - 1.0))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "r": self.r, "eps": self.eps, "k": self.spec.k,
                "sigma": self.spec.sigma, "a0_sq": self.a0_sq, "T": self.T,
                "support_size": int(len(self.support)), "a": self.a_value}


@dataclass(frozen=True)
class WeightProfile:
    support: np.ndarray
    weights: np.ndarray
    r_star: float = math.nan
    mode: str = EXACT

    def __post_init__(self):
        object.__setattr__(self, "support", _readonly(self.support))
        object.__setattr__(self, "weights", _readonly(self.weights))

    def __len__(self):
        return len(self.weights)

    def as_dict(self) -> dict:
        return {tuple(int(x) for x in ell): float(w) for ell, w in zip(self.support, self.weights)}


class _Shells:
    """Lattice points sorted by Sobolev coefficient, with prefix sums.

    On each interval T in (v_q, v_{q+1}] between consecutive distinct
    coefficient values the active set is fixed, so both constraints are
    rational in T^2 and can be solved in closed form once the interval is
    located.
    """

    def __init__(self, points: np.ndarray, spec: EllipsoidSpec):
        c2 = sobolev_coefficient(points, spec) ** 2
        order = np.argsort(c2, kind="stable")
        self.points = points[order]
        self.c2 = c2[order]
        v2, first = np.unique(self.c2, return_index=True)
        self.v2 = v2
        # exclusive prefix sums: totals over points with c^2 < v2[q]
        cs1 = np.concatenate([[0.0], np.cumsum(self.c2)])
        cs2 = np.concatenate([[0.0], np.cumsum(self.c2 ** 2)])
        self.n = first.astype(float)
        self.s1 = cs1[first]
        self.s2 = cs2[first]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (self.n - self.s1 / v2) / (self.s1 - self.s2 / v2)
        ratio[0] = 1.0 / v2[0]
        self.ratio_at_break = ratio

    def can_solve(self, r: float) -> bool:
        return len(self.v2) > 1 and self.ratio_at_break[-1] <= r * r

    def solve(self, r: float):
        """Return (T^2, n_active, S1, S2) for radius r."""
        r2 = r * r
        above = np.nonzero(self.ratio_at_break > r2)[0]
        q = int(above.max())
        if q + 1 >= len(self.v2):
            raise NumericError("lattice enumeration does not bracket the cutoff")
        n, s1, s2 = self.n[q + 1], self.s1[q + 1], self.s2[q + 1]
        t2 = (r2 * s2 - s1) / (r2 * s1 - n)
        if not (self.v2[q] * (1 - 1e-12) <= t2 <= self.v2[q + 1] * (1 + 1e-12)):
            raise NumericError(f"cutoff T^2={t2:g} outside its bracket")
        return t2, int(n), s1, s2


def _shells_for_cutoff(T: float, spec: EllipsoidSpec, budget: int) -> _Shells:
    radius = T ** (1 / spec.sigma) / (2 * math.pi)
    return _Shells(enumerate_ball(spec, radius, budget), spec)


def _bracketing_shells(r: float, spec: EllipsoidSpec, budget: int) -> _Shells:
    if not 0 < r < spec.r_max:
        raise EmptyEllipsoidError(
            f"r={r:g} outside (0, {spec.r_max:g}) for k={spec.k}, sigma={spec.sigma:g}")
    # start near the asymptotic cutoff, then grow geometrically
    T = max(2.0 * spec.c_min, 1.1 * math.sqrt(1 + 4 * spec.sigma / spec.k) / r)
    while True:
        shells = _shells_for_cutoff(T, spec, budget)
        if shells.can_solve(r):
            return shells
        T *= 1.5


def _a_from_shells(t2, n, s1, s2, eps):
    a0_sq = 1.0 / (s1 - s2 / t2)
    sum4 = a0_sq ** 2 * (n - 2 * s1 / t2 + s2 / t2 ** 2)
    return math.sqrt(sum4 / 2) / eps ** 2


def _solution_from_shells(shells: _Shells, r, spec, eps) -> ExtremalSolution:
    t2, n, s1, s2 = shells.solve(r)
    w = 1.0 - shells.c2[:n] / t2
    keep = w > 0
    support = shells.points[:n][keep]
    w = w[keep]
    a0_sq = 1.0 / float(np.dot(shells.c2[:n][keep], w))
    theta_sq = a0_sq * w
    a_val = math.sqrt(float(np.dot(theta_sq, theta_sq)) / 2) / eps ** 2
    order = np.lexsort(support.T[::-1])
    return ExtremalSolution(r=r, eps=eps, spec=spec, a0_sq=a0_sq, T=math.sqrt(t2),
                            support=support[order], theta_sq=theta_sq[order],
                            a_value=a_val, mode=EXACT)


def solve_extremal_exact(r: float, spec: EllipsoidSpec, eps: float,
                         budget: int = DEFAULT_POINT_BUDGET) -> ExtremalSolution:
    """Exact lattice solution of the extremal problem at radius ``r``.

    The cutoff T is located by bisection over the sorted coefficient values
    (the ratio constraint is monotone in T) and then solved exactly inside
    its interval; a0^2 follows from the Sobolev constraint.
    """
    if not eps > 0:
        raise InvalidArgumentError("eps must be positive")
    shells = _bracketing_shells(r, spec, budget)
    return _solution_from_shells(shells, r, spec, eps)


def a_exact(solution: ExtremalSolution) -> float:
    return math.sqrt(float(np.sum(solution.theta_sq ** 2)) / 2) / solution.eps ** 2


def _log_c_fixed_k(spec: EllipsoidSpec) -> float:
    k, s = spec.k, spec.sigma
    log_c2 = (k * math.log(math.pi) + math.log1p(2 * s / k) + gammaln(1 + k / 2)
              - (1 + k / (2 * s)) * math.log1p(4 * s / k) - k * gammaln(1.5))
    return 0.5 * log_c2


def asymptotic_constant(spec: EllipsoidSpec) -> float:
    """C(sigma, k) in a(r) ~ C r^(2 + k/(2 sigma)) / eps^2."""
    return math.exp(_log_c_fixed_k(spec))


def _exponent(spec: EllipsoidSpec) -> float:
    return 2 + spec.k / (2 * spec.sigma)


def a_asymptotic_fixed_k(r: float, spec: EllipsoidSpec, eps: float) -> float:
    return asymptotic_constant(spec) * r ** _exponent(spec) / eps ** 2


def a_asymptotic_growing_k(r: float, spec: EllipsoidSpec, eps: float) -> float:
    k = spec.k
    log_c = (k / 4) * math.log(2 * math.pi * k / math.e) - 1 + 0.25 * math.log(math.pi * k)
    return math.exp(log_c) * r ** _exponent(spec) / eps ** 2


def _theta_prefactor(r: float, spec: EllipsoidSpec, regime: str) -> float:
    k, s = spec.k, spec.sigma
    if regime == FIXED_K:
        log_p = (k * math.log(2) + (k / 2) * math.log(math.pi) + math.log(k + 2 * s)
                 + gammaln(1 + k / 2) - math.log(2 * s) - (k / (2 * s)) * math.log1p(4 * s / k))
    elif regime == GROWING_K:
        log_p = (0.5 * math.log(math.pi) + (k / 2) * math.log(2 * math.pi * k / math.e)
                 + 1.5 * math.log(k) - math.log(2 * s) - 2)
    else:
        raise InvalidArgumentError(f"unknown regime {regime!r}")
    return math.exp(log_p) * r ** (2 + k / s)


def theta_star_asymptotic(ell, r: float, spec: EllipsoidSpec, regime: str = FIXED_K):
    """Closed-form [theta*_l(r)]^2 including the positive-part cutoff.

    ``ell`` may be a single index or an ``(n, k)`` array.
    """
    c2 = np.asarray(sobolev_coefficient(ell, spec)) ** 2
    shape = np.clip(1.0 - c2 * r * r / (1 + 4 * spec.sigma / spec.k), 0.0, None)
    out = _theta_prefactor(r, spec, regime) * shape
    return float(out) if np.ndim(out) == 0 else out


def asymptotic_solution(r: float, spec: EllipsoidSpec, eps: float, regime: str = FIXED_K,
                        budget: int = DEFAULT_POINT_BUDGET) -> ExtremalSolution:
    """The closed-form profile tabulated over its (finite) support."""
    support = enumerate_ball(spec, support_radius(r, spec), budget)
    theta_sq = theta_star_asymptotic(support, r, spec, regime)
    keep = theta_sq > 0
    a_fn = a_asymptotic_fixed_k if regime == FIXED_K else a_asymptotic_growing_k
    return ExtremalSolution(
        r=r, eps=eps, spec=spec, a0_sq=_theta_prefactor(r, spec, regime),
        T=math.sqrt(1 + 4 * spec.sigma / spec.k) / r,
        support=support[keep], theta_sq=theta_sq[keep],
        a_value=a_fn(r, spec, eps), mode=ASYMPTOTIC)


def weights(support, theta_sq, a: float, eps: float, r_star: float = math.nan,
            mode: str = EXACT) -> WeightProfile:
    """omega_l = theta_l^2 / (2 eps^2 a), rescaled so that sum(omega^2) = 1/2."""
    if not a > 0:
        raise InvalidArgumentError("a must be positive")
    support = np.asarray(support, dtype=np.int64)
    if support.ndim == 1:
        support = support[:, None]
    theta_sq = np.asarray(theta_sq, dtype=float)
    keep = theta_sq > 0
    if not keep.any():
        raise InvalidArgumentError("theta*^2 profile is identically zero")
    w = theta_sq[keep] / (2 * eps ** 2 * a)
    w = w * math.sqrt(0.5 / float(np.dot(w, w)))
    return WeightProfile(support=support[keep], weights=w, r_star=r_star, mode=mode)


def profile_weights(solution: ExtremalSolution) -> WeightProfile:
    return weights(solution.support, solution.theta_sq, solution.a_value, solution.eps,
                   r_star=solution.r, mode=solution.mode)


def solve_r_star(target: float, spec: EllipsoidSpec, eps: float, mode: str = ASYMPTOTIC,
                 rtol: float = 1e-10, budget: int = DEFAULT_POINT_BUDGET) -> float:
    """Radius r with a(r) = target."""
    if not target > 0:
        raise InvalidArgumentError("target must be positive")
    r_asym = (target * eps ** 2 / asymptotic_constant(spec)) ** (1 / _exponent(spec))
    if mode == ASYMPTOTIC:
        if r_asym >= spec.r_max:
            raise OutOfRangeError(f"r*={r_asym:g} is not below {spec.r_max:g}")
        return r_asym
    if mode != EXACT:
        raise InvalidArgumentError(f"unknown mode {mode!r}")

    hi = spec.r_max * (1 - 1e-9)
    lo = min(r_asym, hi) / 2
    shells = _bracketing_shells(lo, spec, budget)

    def a_of(r):
        return _a_from_shells(*shells.solve(r), eps)

    while a_of(lo) >= target:
        lo /= 2
        shells = _bracketing_shells(lo, spec, budget)
    if a_of(hi) < target:
        raise OutOfRangeError(f"target a={target:g} exceeds a(r) over the admissible range")
    # a is increasing in r; bisect on log r
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if a_of(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
