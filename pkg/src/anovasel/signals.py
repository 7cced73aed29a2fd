"""Test functions, their Fourier coefficients in the trigonometric basis, and
bivariate product components.

Basis on [0, 1]: phi_0 = 1, phi_l = sqrt(2) cos(2 pi l t) and
phi_{-l} = sqrt(2) sin(2 pi l t) for l > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, NumericError
from .ioutil import atomic_write
from .lattice import EllipsoidSpec, check_subset, sobolev_coefficient
from .rng import pack_lattice

ZERO_CUTOFF = 1e-14
QUAD_TOL = 1e-9
_GL_NODES = 16
_MAX_PANELS = 2 ** 22


def _g1(t):
    return t ** 2 * (2.0 ** (t - 1) - (t - 0.5) ** 2) * np.exp(t) - 0.5424


def _g2(t):
    return t ** 2 * (2.0 ** (t - 1) - (t - 1) ** 5) - 0.2887


def _g3(t):
    return 15 * t ** 2 * 2.0 ** (t - 1) * np.cos(15 * t) - 0.5011


def _g4(t):
    return t - 0.5


def _g5(t):
    return 5 * (t - 0.7) ** 3 + 0.29


@dataclass(frozen=True)
class ComponentFunction:
    """A univariate function on [0, 1], identified by ``id``."""

    id: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


CATALOGUE = {name: ComponentFunction(name, fn) for name, fn in
             [("g1", _g1), ("g2", _g2), ("g3", _g3), ("g4", _g4), ("g5", _g5)]}


def component(g) -> ComponentFunction:
    if isinstance(g, ComponentFunction):
        return g
    try:
        return CATALOGUE[g]
    except KeyError:
        raise InvalidArgumentError(f"unknown component function {g!r}") from None


def tabulated(t, values, name: str = "tabulated") -> ComponentFunction:
    """Cubic-spline interpolant of (t, value) pairs covering [0, 1]."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != values.shape or t[0] > 0 or t[-1] < 1:
        raise InvalidArgumentError("tabulated function needs a 1-D grid covering [0, 1]")
    spline = CubicSpline(t, values)
    return ComponentFunction(name, lambda x: spline(x))


def eval_g(g, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0) | (t_arr > 1)):
        raise InvalidArgumentError("t must lie in [0, 1]")
    out = component(g)(t_arr)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def _gl_rule(p: int):
    x, w = np.polynomial.legendre.leggauss(p)
    return (x + 1) / 2, w / 2


def _panel_transform(g: ComponentFunction, n_panels: int, lmax: int) -> np.ndarray:
    """Composite Gauss-Legendre values of int_0^1 g(t) exp(-2 pi i l t) dt, l = 0..lmax.

    With nodes t = (j + x_i)/N the sum over panels j is a length-N DFT for
    each node offset x_i, so all frequencies come from p FFTs.
    """
    x, w = _gl_rule(_GL_NODES)
    j = np.arange(n_panels)
    vals = g((j[:, None] + x[None, :]) / n_panels)  # (N, p)
    spec = np.fft.fft(vals * w[None, :], axis=0)[: lmax + 1]  # (lmax+1, p)
    l = np.arange(lmax + 1)
    phase = np.exp(-2j * np.pi * l[:, None] * x[None, :] / n_panels)
    return (spec * phase).sum(axis=1) / n_panels


def fourier_coefficients(g, lmax: int, tol: float = QUAD_TOL) -> np.ndarray:
    """Coefficients (g, phi_l) for l = -lmax..lmax; entry ``l + lmax``.

    Panels are doubled until successive estimates agree to ``tol``.
    """
    g = component(g)
    lmax = int(lmax)
    n = 8
    while n <= lmax:
        n *= 2
    prev = _panel_transform(g, n, lmax)
    while True:
        n *= 2
        if n > _MAX_PANELS:
            raise NumericError(f"quadrature for {g.id} did not converge up to l={lmax}")
        cur = _panel_transform(g, n, lmax)
        if np.max(np.abs(cur - prev)) < tol / 2:
            break
        prev = cur
    cos_part = math.sqrt(2) * cur.real[1:]
    sin_part = -math.sqrt(2) * cur.imag[1:]
    out = np.concatenate([sin_part[::-1], [cur.real[0]], cos_part])
    out[np.abs(out) < ZERO_CUTOFF] = 0.0
    return out


def fourier_coefficient_1d(g, l: int, tol: float = QUAD_TOL) -> float:
    if l == 0:
        raise InvalidArgumentError("l must be nonzero")
    coefs = fourier_coefficients(g, abs(l), tol)
    return float(coefs[l + abs(l)])


def mean_value(g, tol: float = QUAD_TOL) -> float:
    return float(fourier_coefficients(g, 0, tol)[0])


def check_zero_mean(g, tol: float) -> bool:
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    return abs(mean_value(g)) <= tol


class FourierTable:
    """Fourier coefficients theta_l(u) of one component on the box [-s, s]^k."""

    subset: tuple
    s: int
    label: str

    def theta(self, ells) -> np.ndarray:
        raise NotImplementedError

    def items(self):
        """Iterate over (index tuple, value) for every nonzero stored entry."""
        raise NotImplementedError

    @property
    def entries(self) -> dict:
        return dict(self.items())


class ProductTable(FourierTable):
    """theta_(l1, l2) = scale * (a, phi_l1) (b, phi_l2); 1-D coefficients are stored once."""

    def __init__(self, subset, s: int, factor_ids: Sequence[str], factors: Sequence[np.ndarray],
                 scale: float = 1.0):
        self.subset = tuple(subset)
        self.s = int(s)
        self.factor_ids = tuple(factor_ids)
        self.factors = tuple(np.asarray(f, dtype=float) for f in factors)
        for f in self.factors:
            f.setflags(write=False)
        self.scale = float(scale)
        self.label = "*".join(self.factor_ids)

    def row(self, j: int) -> np.ndarray:
        """Scaled 1-D coefficients of factor j, indexed by l + s (l = 0 entry is 0)."""
        f = self.factors[j].copy()
        f[self.s] = 0.0
        return f * (self.scale if j == 0 else 1.0)

    def theta(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        if ells.ndim == 1:
            ells = ells[None, :]
        inside = np.all((np.abs(ells) <= self.s) & (ells != 0), axis=1)
        idx = np.where(inside[:, None], ells + self.s, self.s)
        out = np.full(len(ells), self.scale)
        for j, f in enumerate(self.factors):
            out = out * f[idx[:, j]]
        out[~inside] = 0.0
        return out

    def items(self):
        ls = np.concatenate([np.arange(-self.s, 0), np.arange(1, self.s + 1)])
        grids = np.meshgrid(*([ls] * len(self.factors)), indexing="ij")
        ells = np.stack([g.ravel() for g in grids], axis=1)
        vals = self.theta(ells)
        for ell, v in zip(ells, vals):
            if v != 0.0:
                yield tuple(int(x) for x in ell), float(v)

    def scaled(self, alpha: float) -> "ProductTable":
        return ProductTable(self.subset, self.s, self.factor_ids, self.factors, self.scale * alpha)


class SparseTable(FourierTable):
    """Explicit coefficients on a finite set of lattice indices."""

    def __init__(self, subset, s: int, entries, label: str = "explicit"):
        self.subset = tuple(subset)
        self.s = int(s)
        self.label = label
        if isinstance(entries, dict):
            ells = np.array(list(entries.keys()), dtype=np.int64).reshape(
                len(entries), len(self.subset))
            vals = np.array(list(entries.values()), dtype=float)
        else:
            ells, vals = entries
            ells = np.asarray(ells, dtype=np.int64)
            vals = np.asarray(vals, dtype=float)
        keep = np.abs(vals) >= ZERO_CUTOFF
        ells, vals = ells[keep], vals[keep]
        if len(ells) and (np.any(ells == 0) or np.any(np.abs(ells) > self.s)):
            raise InvalidArgumentError("index outside the truncation box")
        order = np.lexsort(ells.T[::-1]) if len(ells) else np.arange(0)
        self.ells, self.values = ells[order], vals[order]
        keys = pack_lattice(self.ells) if len(ells) else np.zeros(0, dtype=np.uint64)
        self._korder = np.argsort(keys)
        self._keys = keys[self._korder]

    def theta(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        if ells.ndim == 1:
            ells = ells[None, :]
        out = np.zeros(len(ells))
        if len(self._keys) == 0:
            return out
        q = pack_lattice(ells)
        pos = np.clip(np.searchsorted(self._keys, q), 0, len(self._keys) - 1)
        hit = self._keys[pos] == q
        out[hit] = self.values[self._korder[pos[hit]]]
        return out

    def items(self):
        for ell, v in zip(self.ells, self.values):
            yield tuple(int(x) for x in ell), float(v)

    def scaled(self, alpha: float) -> "SparseTable":
        return SparseTable(self.subset, self.s, (self.ells, self.values * alpha), self.label)


@lru_cache(maxsize=64)
def _cached_coefficients(g_id: str, s: int) -> np.ndarray:
    return fourier_coefficients(CATALOGUE[g_id], s)


def fourier_table_product(a, b, subset, s: int) -> ProductTable:
    """Coefficient table of (t1, t2) -> a(t1) b(t2) for the 2-subset ``subset``."""
    subset = check_subset(subset)
    if len(subset) != 2:
        raise InvalidArgumentError("product tables are bivariate")
    if s < 1:
        raise InvalidArgumentError("truncation s must be >= 1")
    facs = []
    for g in (a, b):
        g = component(g)
        if g.id in CATALOGUE and CATALOGUE[g.id] is g:
            facs.append(_cached_coefficients(g.id, int(s)))
        else:
            facs.append(fourier_coefficients(g, s))
    return ProductTable(subset, s, (component(a).id, component(b).id), facs)


def scale_component(table: FourierTable, alpha: float) -> FourierTable:
    return table.scaled(alpha)


def norms(table: FourierTable, spec: EllipsoidSpec) -> tuple[float, float]:
    """(L2 norm, Sobolev semi-norm) over the stored entries."""
    if isinstance(table, ProductTable) and len(table.factors) == 2:
        return _product_norms(table, spec)
    vals = list(table.items())
    if not vals:
        return 0.0, 0.0
    ells = np.array([e for e, _ in vals])
    th = np.array([v for _, v in vals])
    c = sobolev_coefficient(ells, spec)
    return math.sqrt(float(np.dot(th, th))), math.sqrt(float(np.dot(th * th, c * c)))


def _product_norms(table: ProductTable, spec: EllipsoidSpec) -> tuple[float, float]:
    s = table.s
    a2 = table.row(0) ** 2
    b2 = table.row(1) ** 2
    l2 = (np.arange(-s, s + 1, dtype=float) * 2 * np.pi) ** 2
    l2_norm = math.sqrt(a2.sum() * b2.sum())
    sig = spec.sigma
    if float(sig).is_integer():
        # (x + y)^sigma expands binomially, so the double sum separates
        n = int(sig)
        total = sum(math.comb(n, i) * np.dot(a2, l2 ** i) * np.dot(b2, l2 ** (n - i))
                    for i in range(n + 1))
    else:
        total = 0.0
        for i in range(0, 2 * s + 1, 512):
            blk = slice(i, i + 512)
            cc = (l2[blk, None] + l2[None, :]) ** sig
            total += float(np.einsum("i,ij,j->", a2[blk], cc, b2))
    return l2_norm, math.sqrt(float(total))


def write_table(table: FourierTable, path, extra_header: dict | None = None) -> None:
    """Columnar text export: ``#`` header lines, then one "l1 l2 theta" row per entry."""
    lines = [f"# subset {' '.join(map(str, table.subset))}", f"# s {table.s}",
             f"# factors {table.label.replace('*', ' ')}"]
    for key, val in (extra_header or {}).items():
        lines.append(f"# {key} {val}")
    for ell, v in table.items():
        lines.append(" ".join(str(x) for x in ell) + f" {v:.17g}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_table(path) -> SparseTable:
    header, entries = {}, {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, rest = line[1:].strip().partition(" ")
                header[key] = rest
                continue
            *ell, v = line.split()
            entries[tuple(int(x) for x in ell)] = float(v)
    subset = tuple(int(x) for x in header["subset"].split())
    label = "*".join(header.get("factors", "explicit").split())
    return SparseTable(subset, int(header["s"]), entries, label)


@dataclass
class SparseSignal:
    """Active components keyed by subset; the pattern is the key set."""

    d: int
    k: int
    components: dict

    def __contains__(self, u):
        return tuple(u) in self.components

    def __getitem__(self, u) -> FourierTable:
        return self.components[tuple(u)]

    @property
    def active(self) -> frozenset:
        return frozenset(self.components)


def reference_signal(d: int, s: int, alpha: float = 1.0, alpha_target: str = "u1") -> SparseSignal:
    """The ten bivariate product components on their reference subsets.

    ``alpha`` multiplies the first component only (``alpha_target="u1"``) or
    every component (``"all"``).
    """
    from .model import REFERENCE_FACTORS, reference_subsets

    if alpha_target not in ("u1", "all"):
        raise InvalidArgumentError(f"alpha_target must be 'u1' or 'all', got {alpha_target!r}")
    comps = {}
    for i, (u, (a, b)) in enumerate(zip(reference_subsets(d), REFERENCE_FACTORS)):
        table = fourier_table_product(a, b, u, s)
        if alpha_target == "all" or i == 0:
            table = table.scaled(alpha)
        comps[u] = table
    return SparseSignal(d, 2, comps)
