"""Command-line front end: ``elastodg <study> [options]``.

Each study ships with the defaults used throughout the repository's
experiment scripts; any of them can be overridden per run.  Omega lists
accept both plain numbers and inclusive ranges written ``a:b`` or
``a:b:step``.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .experiments import (ExperimentConfig, run_compare, run_convergence,
                          run_pollution, run_single, run_stability)

DEFAULTS = {
    "stability": dict(omegas="1:200", ns=(20, 100), methods=("dg", "fem")),
    "convergence": dict(omegas=(5, 10, 20, 30), ns=(8, 16, 32, 64),
                        methods=("dg",)),
    "pollution": dict(omegas=(10, 20, 40), rules=("wh=1", "wh=0.5", "w3h2=1"),
                      methods=("dg",)),
    "compare": dict(omegas=(100,), ns=(50, 120, 200), methods=("dg", "fem")),
    "single": dict(omegas=(50,), ns=(70,), methods=("dg",)),
}


def parse_omegas(tokens) -> tuple:
    """Expand omega tokens; ``a:b`` and ``a:b:step`` are inclusive ranges."""
    if isinstance(tokens, str):
        tokens = [tokens]
    out = []
    for tok in tokens:
        tok = str(tok)
        if ":" in tok:
            parts = tok.split(":")
            if len(parts) not in (2, 3):
                raise ValueError(f"bad omega range {tok!r}")
            a, b = float(parts[0]), float(parts[1])
            step = float(parts[2]) if len(parts) == 3 else 1.0
            if step <= 0 or b < a:
                raise ValueError(f"bad omega range {tok!r}")
            w = a
            while w <= b + 1e-9:
                out.append(float(w))
                w += step
        else:
            out.append(float(tok))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastodg",
        description="Elastic-wave DG experiment driver (square domain, "
                    "uniform criss-cross meshes, absorbing boundary).")
    sub = parser.add_subparsers(dest="study", required=True, metavar="study")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--omega", nargs="+", metavar="W",
                       help="frequencies; numbers or inclusive ranges a:b[:step]")
        p.add_argument("--n", nargs="+", type=int, metavar="N",
                       help="mesh subdivisions per side (h = 1/n)")
        p.add_argument("--gamma0", type=float, default=10.0,
                       help="displacement-jump penalty (default 10)")
        p.add_argument("--gamma1", type=float, default=0.1,
                       help="traction-jump penalty (default 0.1)")
        p.add_argument("--rho", type=float, default=1.0)
        p.add_argument("--lam", type=float, default=1.0)
        p.add_argument("--mu", type=float, default=1.0)
        p.add_argument("--quad", type=int, default=10,
                       help="quadrature degree for data and errors (default 10)")
        p.add_argument("--tol", type=float, default=1e-10,
                       help="relative-residual target for the linear solver")
        p.add_argument("--method", choices=("dg", "fem", "both"), default=None,
                       help="discretization(s) to run")
        p.add_argument("--solver", choices=("auto", "direct", "iterative"),
                       default="auto", help="linear-solver strategy")
        p.add_argument("--out", default=None, metavar="PATH.csv",
                       help="output CSV (default <study>.csv)")
        p.add_argument("--svg", action="store_true",
                       help="also write a plot next to the CSV")
        p.add_argument("--seed", type=int, default=0)

    ps = sub.add_parser("stability", help="norm sweep over omega at fixed h")
    common(ps)
    ps.add_argument("--h", nargs="+", type=float, metavar="H",
                    help="mesh sizes as h values (n = round(1/h))")

    common(sub.add_parser("convergence", help="error vs h at fixed omega"))

    pp = sub.add_parser("pollution", help="error along omega-tied mesh rules")
    common(pp)
    pp.add_argument("--rule", nargs="+", metavar="RULE",
                    help='mesh rules, e.g. "wh=0.5" or "w3h2=1"')

    common(sub.add_parser("compare", help="DG vs FEM cross-section study"))

    pg = sub.add_parser("single", help="one solve with full diagnostics")
    common(pg)
    pg.add_argument("--dump", default=None, metavar="PATH.csv",
                    help="write per-element centroid values of the solution")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = DEFAULTS[args.study]
    omegas = parse_omegas(args.omega if args.omega else base["omegas"])
    if args.study == "stability" and getattr(args, "h", None):
        ns = tuple(int(round(1.0 / h)) for h in args.h)
    elif args.n:
        ns = tuple(args.n)
    else:
        ns = tuple(base.get("ns", ()))
    if args.method == "both":
        methods = ("dg", "fem")
    elif args.method:
        methods = (args.method,)
    else:
        methods = base["methods"]
    rules = tuple(getattr(args, "rule", None) or base.get("rules", ()))
    return ExperimentConfig(
        study=args.study, omegas=omegas, ns=ns, rules=rules, methods=methods,
        rho=args.rho, lam=args.lam, mu=args.mu, gamma0=args.gamma0,
        gamma1=args.gamma1, quad=args.quad, tol=args.tol, solver=args.solver,
        out=args.out or f"{args.study}.csv", svg=args.svg,
        dump=getattr(args, "dump", None), seed=args.seed)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        build_parser().error(str(exc))

    if cfg.study == "stability":
        records, smoothness = run_stability(cfg)
        print(f"wrote {len(records)} rows to {cfg.out}")
        for (m, n), step in sorted(smoothness.items()):
            print(f"  smoothness proxy {m} n={n}: "
                  f"max relative norm step {step:.3e}")
    elif cfg.study == "convergence":
        records, slopes = run_convergence(cfg)
        print(f"wrote {len(records)} rows to {cfg.out}")
        for (m, w), (s1, s2) in sorted(slopes.items()):
            print(f"  slopes {m} omega={w:g}: seminorm {s1:.3f}, L2 {s2:.3f}")
    elif cfg.study == "pollution":
        records = run_pollution(cfg)
        print(f"wrote {len(records)} rows to {cfg.out}")
    elif cfg.study == "compare":
        records, xsec = run_compare(cfg)
        print(f"wrote {len(records)} rows to {cfg.out}")
        print(f"  cross-section table: {xsec}")
    else:
        rec, norms, report = run_single(cfg)
        print(f"wrote 1 row to {cfg.out}")
        print(f"  dofs {rec.dofs}, solver {report.method}, "
              f"residual {report.residual:.3e}")
        print(f"  rel errors: seminorm {rec.rel_err_h1semi:.6e}, "
              f"L2 {rec.rel_err_l2:.6e}")
        print(f"  norm_1h {norms.norm_1h:.6e}, j0 {norms.j0:.3e}, "
              f"j1 {norms.j1:.3e}")
        if cfg.dump:
            print(f"  centroid dump: {cfg.dump}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
