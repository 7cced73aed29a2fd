"""Command line entry point: ``anovasel <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import InvalidArgumentError
from .extremal import ASYMPTOTIC, EXACT, asymptotic_solution, solve_extremal_exact, solve_r_star
from .lattice import EllipsoidSpec
from .selector import selection_target
from .signals import component, fourier_coefficients, fourier_table_product

log = logging.getLogger("anovasel")


def _ellipsoid(args) -> EllipsoidSpec:
    return EllipsoidSpec(args.k, args.sigma)


def cmd_extremal(args) -> str:
    spec = _ellipsoid(args)
    sol = (solve_extremal_exact(args.r, spec, args.eps) if args.mode == EXACT
           else asymptotic_solution(args.r, spec, args.eps))
    return (f"a {sol.a_value:.12g}\na0_sq {sol.a0_sq:.12g}\nT {sol.T:.12g}\n"
            f"support_size {len(sol.support)}\n")


def cmd_rstar(args) -> str:
    spec = _ellipsoid(args)
    r = solve_r_star(selection_target(args.d, args.k, args.beta), spec, args.eps, args.mode)
    return f"{r:.12g}\n"


def cmd_fourier(args) -> str:
    coef = fourier_coefficients(component(args.g), args.lmax)
    lines = ["l theta"]
    for l in range(-args.lmax, args.lmax + 1):
        lines.append(f"{l} {coef[l + args.lmax]:.17g}")
    return "\n".join(lines) + "\n"


def cmd_fourier_product(args) -> str:
    table = fourier_table_product(args.ga, args.gb, (1, 2), args.s)
    lines = [f"# factors {args.ga} {args.gb}", f"# s {args.s}", "l1 l2 theta"]
    for ell, v in table.items():
        if v != 0.0:
            lines.append(f"{ell[0]} {ell[1]} {v:.17g}")
    return "\n".join(lines) + "\n"


def cmd_risk(args) -> str:
    spec, _ = harness.load_config(args.config, "risk")
    rep = harness.run_risk_experiment(spec, args.threads)
    return harness.risk_csv(rep) if args.out == "csv" else harness.dumps(rep.to_dict())


def cmd_table1(args) -> str:
    spec, extra = harness.load_config(args.config, "table1")
    alphas = extra.get("alphas", harness.TABLE1_ALPHAS)
    ds = extra.get("ds", [spec.d])
    table = harness.reproduce_table1(alphas, ds, spec, args.threads)
    if args.out == "json":
        return harness.dumps([rep.to_dict() for _, rep in sorted(table.items())])
    return harness.table1_csv(table)


def cmd_boundary(args) -> str:
    spec, extra = harness.load_config(args.config, "boundary")
    if "multipliers" not in extra:
        raise InvalidArgumentError("boundary config needs multipliers")
    rep = harness.boundary_sweep(spec, extra["multipliers"], args.threads)
    return harness.boundary_csv(rep) if args.out == "csv" else harness.dumps(rep.to_dict())


def cmd_phase_vector(args) -> str:
    cfg = harness.load_config(args.config, "phase-vector")
    rep = harness.phase_sweep_vector(cfg["d"], cfg.get("k", 1), cfg["beta"], cfg["multipliers"],
                                     cfg["replicates"], cfg.get("seed", 0), cfg.get("kappa"))
    return harness.boundary_csv(rep) if args.out == "csv" else harness.dumps(rep.to_dict())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anovasel", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def geometry(sp):
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--sigma", type=float, required=True)
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--mode", choices=[EXACT, ASYMPTOTIC], default=ASYMPTOTIC)

    sp = sub.add_parser("extremal", help="extremal problem at radius r")
    geometry(sp)
    sp.add_argument("--r", type=float, required=True)
    sp.set_defaults(func=cmd_extremal)

    sp = sub.add_parser("rstar", help="radius at the selection boundary")
    geometry(sp)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.set_defaults(func=cmd_rstar)

    sp = sub.add_parser("fourier", help="1-D Fourier coefficients of a catalogue function")
    sp.add_argument("--g", required=True)
    sp.add_argument("--lmax", type=int, required=True)
    sp.set_defaults(func=cmd_fourier)

    sp = sub.add_parser("fourier-product", help="coefficients of a product component")
    sp.add_argument("--ga", required=True)
    sp.add_argument("--gb", required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.set_defaults(func=cmd_fourier_product)

    for name, func, outs in [("risk", cmd_risk, ("json", "csv")), ("table1", cmd_table1, ("csv", "json")),
                             ("boundary", cmd_boundary, ("json", "csv")),
                             ("phase-vector", cmd_phase_vector, ("json", "csv"))]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="flat JSON object of experiment fields")
        sp.add_argument("--out", choices=outs, default=outs[0])
        sp.add_argument("--output", default="-", help="file to write (default stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${harness.THREADS_ENV} or 1)")
        sp.set_defaults(func=func)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(asctime)s %(name)s: %(message)s")
    try:
        text = args.func(args)
    except (ValueError, RuntimeError, LookupError, OSError) as exc:
        print(f"anovasel: error: {exc}", file=sys.stderr)
        return 2
    harness.write_output(text, getattr(args, "output", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
