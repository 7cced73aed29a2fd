"""Monte Carlo experiments: Hamming risk of the adaptive selector, the signal
strength ladder, and sweeps across the selection boundary.

Every cycle draws its noise from ``RandomSource(seed, cycle)``, so results
do not depend on how cycles are spread over threads, and runs that differ
only in signal strength see the same noise (paired seeds).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyEllipsoidError, InvalidArgumentError, OutOfRangeError
from .extremal import ASYMPTOTIC, asymptotic_solution, solve_extremal_exact, solve_r_star
from .ioutil import atomic_write
from .lattice import EllipsoidSpec, binom, enumerate_subsets, log_binom
from .model import SparsityPattern, fixed_pattern, observe, sample_pattern, sparsity_index
from .rng import RandomSource
from .selector import GridWeights, SelectorConfig, build_grid_profiles, selection_target, threshold, vector_select
from .signals import SparseSignal, SparseTable, reference_signal

log = logging.getLogger(__name__)

THREADS_ENV = "ANOVASEL_THREADS"
TABLE1_ALPHAS = (0.01, 0.5, 1.0, 2.0, 5.0)
_BLOCK_CELLS = 1 << 22  # observations realized per block


def default_truncation(d: int) -> int:
    return 36000 if d <= 10 else 30000


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentSpec:
    d: int
    k: int = 2
    sigma: float = 1.0
    eps: float = 1e-4
    alpha: float = 1.0
    alpha_target: str = "u1"
    cycles: int = 12
    seed: int = 12345
    epsilon_slack: float = 0.1
    M: int = 20
    mode: str = ASYMPTOTIC
    pattern: str = "fixed"
    beta: float | None = None
    signal: str = "reference"
    multiplier: float = 1.0
    truncation: int | None = None

    def __post_init__(self):
        if self.cycles < 1:
            raise InvalidArgumentError("cycles must be >= 1")
        if not self.eps > 0:
            raise InvalidArgumentError("eps must be positive")
        if self.alpha < 0:
            raise InvalidArgumentError("alpha must be nonnegative")
        if self.pattern not in ("fixed", "random"):
            raise InvalidArgumentError("pattern must be 'fixed' or 'random'")
        if self.pattern == "random" and self.beta is None:
            raise InvalidArgumentError("a random pattern needs beta")
        if self.signal not in ("reference", "extremal"):
            raise InvalidArgumentError("signal must be 'reference' or 'extremal'")
        if self.signal == "reference" and self.k != 2:
            raise InvalidArgumentError("the reference signal is bivariate (k=2)")
        if self.truncation is None:
            object.__setattr__(self, "truncation", default_truncation(self.d))

    @property
    def ellipsoid(self) -> EllipsoidSpec:
        return EllipsoidSpec(self.k, self.sigma)

    @property
    def selector(self) -> SelectorConfig:
        return SelectorConfig(self.epsilon_slack, self.M, None, self.mode)

    def replace(self, **kw) -> "ExperimentSpec":
        return dataclasses.replace(self, **kw)


@dataclass
class RiskReport:
    spec: ExperimentSpec
    per_cycle: list
    false_positives: list
    false_negatives: list
    threshold: float
    r_stars: list
    wall_time: float = 0.0

    @property
    def err(self) -> float:
        return float(np.mean(self.per_cycle))

    def to_dict(self) -> dict:
        # wall_time is left out so reports are reproducible byte for byte
        return {"spec": dataclasses.asdict(self.spec), "err": self.err,
                "per_cycle": self.per_cycle, "false_positives": self.false_positives,
                "false_negatives": self.false_negatives, "threshold": self.threshold,
                "r_stars": self.r_stars}


@dataclass
class BoundaryReport:
    rows: list
    metadata: dict

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": self.rows}


def _pattern_for(spec: ExperimentSpec) -> SparsityPattern:
    if spec.pattern == "fixed":
        if spec.k != 2:
            raise InvalidArgumentError("the fixed pattern is bivariate")
        return fixed_pattern(spec.d)
    return sample_pattern(spec.d, spec.k, spec.beta, RandomSource(spec.seed))


def _extremal_signal(spec: ExperimentSpec, pattern: SparsityPattern) -> SparseSignal:
    """Every active component carries the extremal profile at multiplier * r*."""
    beta = spec.beta if spec.beta is not None else pattern.beta
    ell = spec.ellipsoid
    r_star = solve_r_star(selection_target(spec.d, spec.k, beta), ell, spec.eps, spec.mode)
    r = spec.multiplier * r_star
    if not 0 < r < ell.r_max:
        raise EmptyEllipsoidError(f"r = {r:.6g} outside the admissible range (0, {ell.r_max:.6g})")
    sol =(asymptotic_solution(r, ell, spec.eps) if spec.mode == ASYMPTOTIC
           else solve_extremal_exact(r, ell, spec.eps))
    theta = spec.alpha * np.sqrt(sol.theta_sq)
    s = int(np.abs(sol.support).max())
    comps = {u: SparseTable(u, s, (sol.support, theta), "extremal") for u in pattern.active}
    return SparseSignal(spec.d, spec.k, comps)


def _signal_for(spec: ExperimentSpec, pattern: SparsityPattern) -> SparseSignal:
    if spec.signal == "reference":
        return reference_signal(spec.d, spec.truncation, spec.alpha, spec.alpha_target)
    return _extremal_signal(spec, pattern)


def _blocks(subsets, n_cols):
    step = max(1, _BLOCK_CELLS // max(n_cols, 1))
    for i in range(0, len(subsets), step):
        yield subsets[i:i + step]


class _Context:
    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.subsets = enumerate_subsets(spec.d, spec.k)
        self.pattern = _pattern_for(spec)
        profiles = build_grid_profiles(spec.selector, spec.ellipsoid, spec.d, spec.eps)
        self.grid = GridWeights(profiles)
        self.r_stars = [p.r_star for p in profiles]
        self.threshold = threshold(spec.d, spec.k, spec.M, spec.epsilon_slack)
        log.info("d=%d k=%d: %d subsets, %d grid profiles on %d coordinates, t=%.4f",
                 spec.d, spec.k, len(self.subsets), len(profiles), len(self.grid.ells), self.threshold)

    def cycle(self, cycle: int, signals: Sequence[SparseSignal]) -> list[tuple[int, int]]:
        """(false positives, false negatives) for each signal, all on one noise draw."""
        spec, grid = self.spec, self.grid
        rng = RandomSource(spec.seed, cycle)
        none = SparseSignal(spec.d, spec.k, {})
        fp = [0] * len(signals)
        fn = [0] * len(signals)
        for block in _blocks(self.subsets, len(grid.ells)):
            noise = observe(none, self.pattern, spec.eps, rng, block, grid.ells).values
            base = None
            for i, u in enumerate(block):
                active = u in self.pattern.active
                thetas = [sig[u].theta(grid.ells) if active and u in sig else None
                          for sig in signals]
                if all(t is None for t in thetas):
                    if base is None:
                        base = np.max(grid.statistics(noise, spec.eps), axis=1) > self.threshold
                    hits = [bool(base[i])] * len(signals)
                else:
                    rows = np.stack([noise[i] + (0.0 if t is None else t) for t in thetas])
                    hits = list(np.max(grid.statistics(rows, spec.eps), axis=1) > self.threshold)
                for j, h in enumerate(hits):
                    if h and not active:
                        fp[j] += 1
                    elif active and not h:
                        fn[j] += 1
        return list(zip(fp, fn))


def _run_paired(spec: ExperimentSpec, alphas: Sequence[float],
                threads: int | None = None) -> list[RiskReport]:
    """Risk reports for ``spec`` at each signal scale in ``alphas`` on shared noise."""
    t0 = time.perf_counter()
    ctx = _Context(spec)
    specs = [spec.replace(alpha=float(a)) for a in alphas]
    signals = [_signal_for(s, ctx.pattern) for s in specs]
    threads = default_threads() if threads is None else threads

    def work(c):
        out = ctx.cycle(c, signals)
        log.info("d=%d cycle %d/%d done", spec.d, c + 1, spec.cycles)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(spec.cycles)))
    else:
        results = [work(c) for c in range(spec.cycles)]
    elapsed = time.perf_counter() - t0
    reports = []
    for j, s in enumerate(specs):
        fps = [int(r[j][0]) for r in results]
        fns = [int(r[j][1]) for r in results]
        reports.append(RiskReport(s, [a + b for a, b in zip(fps, fns)], fps, fns,
                                  ctx.threshold, ctx.r_stars, elapsed))
    log.info("d=%d: %d cycles x %d signal scales in %.1fs", spec.d, spec.cycles, len(alphas), elapsed)
    return reports


def run_risk_experiment(spec: ExperimentSpec, threads: int | None = None) -> RiskReport:
    """Estimate Err = mean over cycles of the Hamming distance of the adaptive selector."""
    return _run_paired(spec, [spec.alpha], threads)[0]


def reproduce_table1(alphas: Sequence[float] = TABLE1_ALPHAS, ds: Sequence[int] = (10, 50),
                     base: ExperimentSpec | None = None, threads: int | None = None) -> dict:
    """Err for each (d, alpha) with alpha scaling the first component; keyed by (d, alpha)."""
    base = base or ExperimentSpec(d=10)
    table = {}
    for d in ds:
        spec = base.replace(d=d, truncation=default_truncation(d)
                            if base.truncation == default_truncation(base.d) else base.truncation)
        for a, rep in zip(alphas, _run_paired(spec, alphas, threads)):
            table[(d, float(a))] = rep
    return table


def table1_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "beta", "alpha", "err"])
    for (d, a), rep in sorted(table.items()):
        beta = sparsity_index(d, rep.spec.k, 10) if rep.spec.pattern == "fixed" else rep.spec.beta
        w.writerow([d, f"{beta:.3f}", a, f"{rep.err:.6g}"])
    return buf.getvalue()


def boundary_sweep(base: ExperimentSpec, multipliers: Sequence[float],
                   threads: int | None = None) -> BoundaryReport:
    """Empirical risk when every active component is the extremal profile at c * r*."""
    base = base.replace(signal="extremal")
    rows = []
    for c in multipliers:
        try:
            rep = run_risk_experiment(base.replace(multiplier=float(c)), threads)
        except (EmptyEllipsoidError, OutOfRangeError) as exc:
            log.warning("multiplier %g skipped: %s", c, exc)
            rows.append({"multiplier": float(c), "risk": None, "note": str(exc)})
            continue
        rows.append({"multiplier": float(c), "risk": rep.err, "per_cycle": rep.per_cycle})
    meta = {"d": base.d, "k": base.k, "sigma": base.sigma, "eps": base.eps, "mode": base.mode,
            "beta": base.beta, "cycles": base.cycles, "seed": base.seed}
    return BoundaryReport(rows, meta)


def phase_sweep_vector(d: int, k: int, beta: float, multipliers: Sequence[float],
                       replicates: int, seed: int, kappa: float | None = None) -> BoundaryReport:
    """Hamming risk of the vector-model selector at mu = c sqrt(2)(1 + sqrt(1 - beta)) sqrt(log C)."""
    from .model import vector_observe
    from .selector import hamming

    boundary = math.sqrt(2) * (1 + math.sqrt(1 - beta)) * math.sqrt(log_binom(d, k))
    patterns = [sample_pattern(d, k, beta, RandomSource(seed, rep)) for rep in range(replicates)]
    rows = []
    for c in multipliers:
        risks = []
        for rep, pat in enumerate(patterns):
            x = vector_observe(c * boundary, pat, RandomSource(seed, rep))
            risks.append(hamming(vector_select(x, d, k, kappa), pat))
        rows.append({"multiplier": float(c), "mu": c * boundary, "risk": float(np.mean(risks)),
                     "per_replicate": risks})
    meta = {"d": d, "k": k, "beta": beta, "replicates": replicates, "seed": seed,
            "boundary_mu": boundary}
    return BoundaryReport(rows, meta)


def sparsity_report(d: int, k: int, n_active: int) -> tuple[float, int]:
    return sparsity_index(d, k, n_active), binom(d, k)


def boundary_csv(report: BoundaryReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["multiplier", "risk"])
    for row in report.rows:
        w.writerow([row["multiplier"], "" if row["risk"] is None else f"{row['risk']:.6g}"])
    return buf.getvalue()


def risk_csv(report: RiskReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle", "hamming", "false_positives", "false_negatives"])
    for c, (h, fp, fn) in enumerate(zip(report.per_cycle, report.false_positives,
                                        report.false_negatives)):
        w.writerow([c, h, fp, fn])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_output(text: str, path=None) -> None:
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
    else:
        atomic_write(path, text)


# configuration files

_SPEC_FIELDS = {f.name for f in dataclasses.fields(ExperimentSpec)}
_EXTRA_KEYS = {
    "risk": set(),
    "table1": {"alphas", "ds"},
    "boundary": {"multipliers"},
}
_VECTOR_KEYS = {"d", "k", "beta", "multipliers", "replicates", "seed", "kappa"}


def load_config(path, kind: str = "risk"):
    """Read a flat JSON object; returns (ExperimentSpec, extras) or, for
    ``kind="phase-vector"``, a plain dict.  Unknown keys are errors."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or any(isinstance(v, dict) for v in raw.values()):
        raise InvalidArgumentError("config must be a flat key/value object")
    if kind == "phase-vector":
        unknown = set(raw) - _VECTOR_KEYS
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        missing = {"d", "beta", "multipliers", "replicates"} - set(raw)
        if missing:
            raise InvalidArgumentError(f"missing config keys: {sorted(missing)}")
        return raw
    extras_allowed = _EXTRA_KEYS[kind]
    unknown = set(raw) - _SPEC_FIELDS - extras_allowed
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
    extras = {k: raw.pop(k) for k in list(raw) if k in extras_allowed}
    if "d" not in raw:
        if kind == "table1":
            raw["d"] = (extras.get("ds") or [10])[0]
        else:
            raise InvalidArgumentError("config needs d")
    return ExperimentSpec(**raw), extras
