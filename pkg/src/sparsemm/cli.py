"""Command-line entry point.

Exit codes: 0 success, 1 promise or verification failure, 2 input error.

A ``--config`` file of ``key=value`` lines supplies defaults for any long
option (dashes or underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import io as mio
from .algebra import DomainError
from .bench import ALGS, bench_csv
from .expander import (
    BudgetExceeded,
    ExpanderParams,
    build_pv_expander,
    build_random_expander,
    derive_params,
    dump_graph,
    graph_stats,
    load_graph,
    rs_params,
    verify_expansion,
)
from .instances import STRATEGIES, InfeasibleSpec, InstanceSpec, gen_instance
from .osmm import OsmmConfig, PromiseViolation, osmm_deterministic, osmm_randomized
from .sketch import apply_measurement, build_measurement, recover
from .sparse import ShapeError, sparse_mm
from .verify import VerifierConfig, column_wise_mmv_sparse

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("sparsemm")


def read_config(path) -> dict:
    out = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ValueError(f"bad config line {ln!r}")
        k, v = ln.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _out(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands --------------------------------------------------------------


def cmd_gen(args):
    spec = InstanceSpec(args.n, args.ring, args.delta_in, args.delta_out, args.seed, args.strategy)
    A, B, C = gen_instance(spec)
    prefix = args.output
    for name, M in (("A", A), ("B", B), ("C", C)):
        mio.save(f"{prefix}_{name}.mtx", M)
    print(f"wrote {prefix}_A.mtx {prefix}_B.mtx {prefix}_C.mtx  nnz(A)={A.nnz} nnz(B)={B.nnz} nnz(AB)={C.nnz}")
    return EXIT_OK


def cmd_multiply(args):
    A, B = mio.load(args.a), mio.load(args.b)
    cfg = OsmmConfig(
        t=args.t,
        nnz_bound=args.nnz_bound,
        strategy=args.strategy,
        verifier=VerifierConfig(args.confidence, args.seed),
        post_verify=args.post_verify,
    )
    if args.alg == "naive":
        C = sparse_mm(A, B)
    elif args.alg == "det":
        C = osmm_deterministic(A, B, cfg)
    else:
        C = osmm_randomized(A, B, cfg)
    _out(args.output, mio.dumps(C))
    return EXIT_OK


def cmd_colmmv(args):
    A, B, C = mio.load(args.a), mio.load(args.b), mio.load(args.c)
    J = column_wise_mmv_sparse(A, B, C, VerifierConfig(args.confidence, args.seed))
    print(" ".join(str(j + 1) for j in J))
    return EXIT_OK if not J else EXIT_FAIL


def cmd_sketch_measure(args):
    X = mio.load(args.x)
    x = mio.mat_to_vec(X)
    H = build_measurement(x.length, args.t, mode=args.mode)
    z = apply_measurement(H, x, X.ring)
    _out(args.output, mio.dumps(mio.vec_to_mat(X.ring, z), n=x.length, t=args.t, mode=args.mode))
    return EXIT_OK


def cmd_sketch_recover(args):
    Z, meta = mio.load(args.z, with_meta=True)
    try:
        n, t, mode = int(meta["n"]), int(meta["t"]), meta.get("mode", "rs")
    except KeyError as exc:
        raise mio.FormatError(f"measurement file lacks header key {exc}") from exc
    H = build_measurement(n, t, mode=mode)
    z = mio.mat_to_vec(Z)
    if z.length != H.rows:
        raise ShapeError(f"measurement length {z.length} does not match H ({H.rows} rows)")
    res = recover(H, z, Z.ring)
    _out(args.output, mio.dumps(mio.vec_to_mat(Z.ring, res.x)))
    if not res.ok:
        print("recovery failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_expander_gen(args):
    if args.random:
        if args.d is None or args.M is None:
            raise ValueError("--random needs --d and --M")
        G = build_random_expander(args.N, args.d, args.M, args.seed)
    else:
        if args.q is not None:
            params = ExpanderParams.manual(args.N, args.q, args.poly_degree, args.m, args.h)
        elif args.theory:
            params = derive_params(args.N, args.K, Fraction(args.eps), Fraction(args.alpha))
        else:
            params = rs_params(args.N, args.K, Fraction(args.eps))
        log.info("expander parameters: %s", params)
        G = build_pv_expander(params)
    _out(args.output, dump_graph(G))
    return EXIT_OK


def cmd_expander_verify(args):
    G = load_graph(Path(args.graph).read_text())
    ok, witness = verify_expansion(G, args.K, Fraction(args.eps))
    if ok:
        print(f"ok: ({args.K}, {args.eps})-expander")
        return EXIT_OK
    print("violated by S = " + " ".join(str(s + 1) for s in witness))
    return EXIT_FAIL


def cmd_expander_stats(args):
    G = load_graph(Path(args.graph).read_text())
    for k, v in graph_stats(G).items():
        print(f"{k}={v}")
    return EXIT_OK


def cmd_bench(args):
    grid = [
        InstanceSpec(n, ring, args.delta_in, args.delta_out, seed, args.strategy)
        for n in args.n
        for ring in args.rings
        for seed in range(args.seed, args.seed + args.seeds)
    ]
    text = bench_csv(grid, tuple(args.algs), args.repeats)
    _out(args.output, text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsemm", description="Output-sparse matrix multiplication over exact rings.")
    p.add_argument("--config", help="key=value defaults file")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a planted instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--ring", default="Fp:101")
    g.add_argument("--delta-in", type=float, default=1.0)
    g.add_argument("--delta-out", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--strategy", choices=STRATEGIES, default="random-support")
    g.add_argument("-o", "--output", default="instance", help="file prefix")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("multiply", help="multiply two matrix files")
    m.add_argument("--alg", choices=("det", "rand", "naive"), default="rand")
    m.add_argument("--a", required=True)
    m.add_argument("--b", required=True)
    m.add_argument("--t", type=int)
    m.add_argument("--nnz-bound", type=int)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--confidence", type=int, default=2)
    m.add_argument("--strategy", choices=("auto", "dense", "sparse"), default="auto")
    m.add_argument("--post-verify", action="store_true")
    m.add_argument("-o", "--output", default="-")
    m.set_defaults(func=cmd_multiply)

    v = sub.add_parser("verify", help="product verification")
    vsub = v.add_subparsers(dest="verify_command", required=True)
    c = vsub.add_parser("colmmv", help="columns where AB differs from C")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--c", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--confidence", type=int, default=2)
    c.set_defaults(func=cmd_colmmv)

    s = sub.add_parser("sketch", help="compressed sensing of vectors")
    ssub = s.add_subparsers(dest="sketch_command", required=True)
    sm = ssub.add_parser("measure")
    sm.add_argument("--x", required=True, help="single-column vector file")
    sm.add_argument("--t", type=int, required=True)
    sm.add_argument("--mode", choices=("rs", "theory"), default="rs")
    sm.add_argument("-o", "--output", default="-")
    sm.set_defaults(func=cmd_sketch_measure)
    sr = ssub.add_parser("recover")
    sr.add_argument("--z", required=True, help="measurement file written by 'sketch measure'")
    sr.add_argument("-o", "--output", default="-")
    sr.set_defaults(func=cmd_sketch_recover)

    e = sub.add_parser("expander", help="unbalanced expander tools")
    esub = e.add_subparsers(dest="expander_command", required=True)
    eg = esub.add_parser("gen")
    eg.add_argument("--N", type=int, required=True)
    eg.add_argument("--K", type=int, default=2)
    eg.add_argument("--eps", default="1/12")
    eg.add_argument("--alpha", default="1")
    eg.add_argument("--theory", action="store_true", help="use the asymptotic parameter formulas")
    eg.add_argument("--q", type=int, help="manual field size (power of two)")
    eg.add_argument("--poly-degree", type=int, default=2, help="manual polynomial degree bound n")
    eg.add_argument("--m", type=int, default=1)
    eg.add_argument("--h", type=int, default=2)
    eg.add_argument("--random", action="store_true")
    eg.add_argument("--d", type=int)
    eg.add_argument("--M", type=int)
    eg.add_argument("--seed", type=int, default=0)
    eg.add_argument("-o", "--output", default="-")
    eg.set_defaults(func=cmd_expander_gen)
    ev = esub.add_parser("verify")
    ev.add_argument("--graph", required=True)
    ev.add_argument("--K", type=int, required=True)
    ev.add_argument("--eps", default="1/12")
    ev.set_defaults(func=cmd_expander_verify)
    es = esub.add_parser("stats")
    es.add_argument("--graph", required=True)
    es.set_defaults(func=cmd_expander_stats)

    b = sub.add_parser("bench", help="operation-count benchmark, CSV output")
    b.add_argument("--n", type=int, nargs="*", default=[63, 255])
    b.add_argument("--rings", nargs="+", default=["Fp:101"])
    b.add_argument("--delta-in", type=float, default=1.0)
    b.add_argument("--delta-out", type=float, default=0.5)
    b.add_argument("--strategy", choices=STRATEGIES, default="random-support")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--seeds", type=int, default=1)
    b.add_argument("--algs", nargs="+", choices=ALGS, default=list(ALGS))
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("-o", "--output", default="-")
    b.set_defaults(func=cmd_bench)
    return p


def _apply_config(parser, argv, path):
    conf = read_config(path)
    # defaults must reach the subparser that will actually parse the options
    stack = [parser]
    while stack:
        p = stack.pop()
        known = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in conf.items() if k in known})
        for a in p._actions:
            if isinstance(a, argparse._SubParsersAction):
                stack.extend(a.choices.values())
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, argv, args.config)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except PromiseViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (mio.FormatError, DomainError, ShapeError, InfeasibleSpec, BudgetExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
