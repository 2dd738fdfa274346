"""Command line entry point: ``tractor-poisson <subcommand>``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import comb
from typing import List, Optional

from .checks import REGISTRY, run_all
from .exact_linalg import rat
from .forms import FormSpace, dump_kernel
from .kernels import build_kernel, homology
from .lie import AlgebraModel, QuotientGM, metric_pm
from .operators import KernelCalculus


def _positive_n(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("n must be at least 2")
    return n


def _fraction(text: str) -> Fraction:
    try:
        return rat(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def cmd_verify(args) -> int:
    ids = [s for s in args.checks.split(",") if s] if args.checks else None
    try:
        report = run_all(args.n, ids, k=args.k, lam=args.lam, calibration=not args.no_calibration)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        print("known checks: " + ", ".join(c.id for c in REGISTRY), file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(report.to_json(timing=args.timing), indent=2))
    else:
        print(report.text())
    return 0 if report.ok else 1


def cmd_dims(args) -> int:
    n = args.n
    sp = FormSpace(n)
    d = n + 2
    print(f"n={n} dim g={(n + 1) * (n + 2) // 2} dim g/m={sp.gm_dim} dim V={d} dim End(V)={d * d}")
    print("p q  forms  kernels")
    for p in range(n + 2):
        for q in range(n + 1):
            print(f"{p} {q} {sp.dim(p, q):6d} {sp.kernel_dim(p, q):8d}")
    print("chains on p_+ with values in V")
    for k in range(n + 1):
        print(f"k={k} {comb(n, k) * d}")
    return 0


def cmd_homology(args) -> int:
    for h in homology(AlgebraModel(args.n)):
        w = " ".join(f"{wt}:{m}" for wt, m in h.weights)
        print(f"k={h.k} chains={h.chains} ker={h.kernel} im={h.image} H={h.homology} weights[{w}]")
    return 0


def cmd_dump_kernel(args) -> int:
    calc = KernelCalculus(args.n, args.normalization)
    try:
        ker = build_kernel(calc, args.k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(dump_kernel(getattr(ker, args.part)), end="")
    return 0


def cmd_export_operator(args) -> int:
    calc = KernelCalculus(args.n, args.normalization)
    n = args.n
    if not (0 <= args.p <= n + 1 and 0 <= args.q <= n):
        print(f"error: bidegree ({args.p},{args.q}) out of range for n={n}", file=sys.stderr)
        return 2
    try:
        op = calc.matrix(args.name, args.p, args.q)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    print(op.export(calc.space), end="")
    return 0


def cmd_dump_algebra(args) -> int:
    a = AlgebraModel(args.n)
    q = QuotientGM(a)
    print(f"# so({args.n + 1},1) basis, dim {a.dim}")
    for lab, x in zip(a.labels, a.basis):
        entries = " ".join(f"({r},{c})={_fmt(v)}" for (r, c), v in sorted(x.items()))
        print(f"{lab.name} grade={lab.grade} {entries}")
    print("# Killing form, nonzero entries")
    for i in range(a.dim):
        for j in range(a.dim):
            if a.killing[i][j]:
                print(f"B({a.labels[i].name},{a.labels[j].name})={_fmt(a.killing[i][j])}")
    print("# g/m basis and metric")
    print(" ".join(q.label(i) for i in range(q.dim)))
    g = metric_pm(a, args.normalization)
    for row in g:
        print(" ".join(_fmt(x) for x in row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tractor-poisson", description="Exact kernel calculus for Poisson transforms on SO(n+1,1).")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the identity checks")
    v.add_argument("--n", type=_positive_n, required=True)
    v.add_argument("--k", type=int)
    v.add_argument("--lambda", dest="lam", type=_fraction)
    v.add_argument("--checks", help="comma separated ids or id prefixes such as V12")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("--timing", action="store_true", help="add elapsed milliseconds (makes output nondeterministic)")
    v.add_argument("--no-calibration", action="store_true")
    v.set_defaults(fn=cmd_verify)

    d = sub.add_parser("dims", help="print space dimensions")
    d.add_argument("--n", type=_positive_n, required=True)
    d.set_defaults(fn=cmd_dims)

    h = sub.add_parser("homology", help="homology of p_+ with values in V")
    h.add_argument("--n", type=_positive_n, required=True)
    h.set_defaults(fn=cmd_homology)

    k = sub.add_parser("dump-kernel", help="serialize a Poisson kernel")
    k.add_argument("--n", type=_positive_n, required=True)
    k.add_argument("--k", type=int, required=True)
    k.add_argument("--part", choices=("phi", "phi1", "phi2"), default="phi")
    k.add_argument("--normalization", type=_fraction)
    k.set_defaults(fn=cmd_dump_kernel)

    e = sub.add_parser("export-operator", help="dump an operator block as a sparse matrix")
    e.add_argument("--n", type=_positive_n, required=True)
    e.add_argument("--name", required=True)
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--q", type=int, required=True)
    e.add_argument("--normalization", type=_fraction)
    e.set_defaults(fn=cmd_export_operator)

    a = sub.add_parser("dump-algebra", help="print the matrix model and its Killing form")
    a.add_argument("--n", type=_positive_n, required=True)
    a.add_argument("--normalization", type=_fraction)
    a.set_defaults(fn=cmd_dump_algebra)
    return ap


def cli_main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.fn(args)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
