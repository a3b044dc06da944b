"""Command-line front end: ``python -m biphase <command> ...``.

Exit codes: 0 success / experiment passed, 1 experiment check failed,
2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import census as cs
from . import enumeration as en
from . import experiments as ex
from . import numeric as nc
from . import sampler as sp

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def default_seed() -> int:
    raw = os.environ.get("BIPHASE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BIPHASE_SEED must be an integer, got {raw!r}")


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _emit(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    flat = {k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
            for k, v in sorted(payload.items())}
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
    writer.writeheader()
    writer.writerow(flat)
    out.write(buf.getvalue())


def _scalar_out(args, name, value, out, **extra):
    if args.format is None:
        out.write(f"{value!r}\n")
    else:
        _emit({"quantity": name, "value": value, **extra}, args.format, out)


def _count_out(args, name, value: int, out, **extra):
    if args.format is None:
        out.write(f"{value}\n")
    else:
        _emit({"quantity": name, "value": str(value), **extra}, args.format, out)


# -- subcommand handlers ----------------------------------------------------


def cmd_count(args, out):
    what = args.what
    if what == "trees":
        _count_out(args, "trees", en.count_trees(args.i, args.j), out, i=args.i, j=args.j)
    elif what == "unicyclic":
        _count_out(args, "unicyclic", en.count_unicyclic(args.i, args.j), out, i=args.i, j=args.j)
    elif what == "forest":
        _require(args, "s", "t")
        _count_out(args, "forests", en.count_forests(args.i, args.j, args.s, args.t), out,
                   i=args.i, j=args.j, s=args.s, t=args.t)
    elif what == "oracle":
        _require(args, "m")
        value = en.count_connected_oracle(args.i, args.j, args.m)
        _count_out(args, "connected", value, out, i=args.i, j=args.j, m=args.m)
    elif what == "bound":
        _require(args, "ell")
        bound = en.complex_upper_bound(args.i, args.j, args.ell, args.c)
        naive = en.naive_edge_subset_bound(args.i, args.j, args.ell)
        payload = {"quantity": "complex_bound", "i": args.i, "j": args.j, "ell": args.ell,
                   "c": args.c, "bound": bound.to_json(), "bound_scientific": bound.scientific(),
                   "naive_subset_bound": str(naive)}
        if args.format is None:
            out.write(f"log={bound.log_magnitude!r} value={bound.scientific()} naive={naive}\n")
        else:
            _emit(payload, args.format, out)
    return EXIT_OK


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"count {args.what}: missing {', '.join(missing)}")


def cmd_expect(args, out):
    shape = en.BipartiteShape(args.i, args.j, args.ell)
    p = (1.0 + args.eps) / args.n
    if args.count is not None:
        count = int(args.count)
        source = "given"
    elif shape.k == 1:
        count, source = 1, "isolated vertex"
    elif args.ell == -1:
        count, source = en.count_trees(args.i, args.j), "trees"
    elif args.ell == 0:
        count, source = en.count_unicyclic(args.i, args.j), "unicyclic"
    else:
        count = en.complex_upper_bound(args.i, args.j, args.ell, args.c)
        source = f"complex upper bound, c={args.c!r}"
    value = en.expected_components(args.n, p, shape, count)
    payload = {"n": args.n, "eps": args.eps, "p": p, "i": args.i, "j": args.j, "ell": args.ell,
               "count_source": source, "log": value.log_magnitude, "scientific": value.scientific(),
               "value": value.to_json()}
    if args.format is None:
        out.write(f"log={value.log_magnitude!r} value={value.scientific()}\n")
    else:
        _emit(payload, args.format, out)
    return EXIT_OK


def cmd_scalar(args, out):
    q = args.quantity
    if q == "delta":
        _scalar_out(args, q, nc.delta(_need(args, "eps")), out, eps=args.eps)
    elif q == "eps-prime":
        _scalar_out(args, q, nc.epsilon_prime(_need(args, "eps")), out, eps=args.eps)
    elif q == "lambda":
        _scalar_out(args, q, nc.poisson_lambda(args.r1, args.r2), out, r1=args.r1, r2=args.r2)
    elif q == "nu":
        _scalar_out(args, q, nc.poisson_nu(args.u1, args.u2), out, u1=args.u1, u2=args.u2)
    elif q == "threshold":
        v = nc.tree_order_threshold(_need(args, "n"), _need(args, "eps"), args.alpha)
        _scalar_out(args, q, v, out, n=args.n, eps=args.eps, alpha=args.alpha)
    elif q == "giant":
        v = nc.giant_order_prediction(_need(args, "n"), _need(args, "eps"))
        _scalar_out(args, q, v, out, n=args.n, eps=args.eps)
    elif q == "excess":
        v = nc.giant_excess_prediction(_need(args, "n"), _need(args, "eps"))
        _scalar_out(args, q, v, out, n=args.n, eps=args.eps)
    return EXIT_OK


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"scalar {args.quantity}: missing --{name}")
    return value


def cmd_sample(args, out):
    p = (1.0 + args.eps) / args.n
    if not 0.0 <= p <= 1.0:
        raise nc.DomainError(f"p = (1+eps)/n = {p} is not a probability")
    g = sp.sample(args.n, p, args.seed)
    payload = {"n": args.n, "eps": args.eps, "p": p, "seed": args.seed, "edges": str(g.total_edges)}
    payload["census"] = cs.census(g, args.eps).to_json()
    if args.dump_edges:
        target = sys.stdout if args.dump_edges == "-" else open(args.dump_edges, "w", encoding="utf-8")
        try:
            for line in g.dump_edges():
                target.write(line + "\n")
        finally:
            if target is not sys.stdout:
                target.close()
    if args.dump_edges != "-":
        _emit(payload, args.format or "json", out)
    return EXIT_OK


def cmd_experiment(args, out):
    if args.name not in ex.EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {', '.join(ex.EXPERIMENTS)}")
    values = read_config(args.config) if args.config else {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    for flag, key in (("n", "n"), ("eps", "eps"), ("trials", "trials"), ("seed", "master_seed")):
        if getattr(args, flag) is not None:
            values[key] = str(getattr(args, flag))
    values.setdefault("master_seed", str(default_seed()))
    values["threads"] = str(args.threads)
    try:
        cfg = ex.ExperimentConfig.from_mapping(values)
    except (KeyError, ValueError) as err:
        raise UsageError(f"bad config: {err}")
    report = ex.EXPERIMENTS[args.name](cfg)
    fmt = args.format or "json"
    if fmt == "csv":
        out.write(report.to_csv())
    else:
        out.write(report.to_json(timing=args.timing) + "\n")
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return EXIT_FAIL if report.passed is False else EXIT_OK


def selftest_checks():
    """Exact equivalence of the closed-form counts with brute-force enumeration.

    Yields ``(description, ok)`` pairs.
    """
    for k in range(2, 9):
        for i in range(1, k):
            j = k - i
            yield (f"trees({i},{j})", en.count_connected_oracle(i, j, k - 1) == en.count_trees(i, j))
            if i * j >= k:
                yield (f"unicyclic({i},{j})", en.count_connected_oracle(i, j, k) == en.count_unicyclic(i, j))
            else:
                yield (f"unicyclic({i},{j}) is 0", en.count_unicyclic(i, j) == 0)
    for i in range(1, 7):
        for j in range(1, 7):
            yield (f"forests({i},{j},1,0)", en.count_forests(i, j, 1, 0) == en.count_trees(i, j))


def cmd_selftest(args, out):
    failures = 0
    rows = []
    for name, ok in selftest_checks():
        failures += not ok
        rows.append({"check": name, "pass": bool(ok)})
    if args.format == "json":
        out.write(json.dumps({"checks": rows, "failures": failures}, sort_keys=True) + "\n")
    else:
        for r in rows:
            out.write(f"{'PASS' if r['pass'] else 'FAIL'} {r['check']}\n")
        out.write(f"{len(rows) - failures}/{len(rows)} passed\n")
    return EXIT_OK if failures == 0 else EXIT_FAIL


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = _Parser(add_help=False)
    fmt.add_argument("--format", choices=("json", "csv"), default=None)

    parser = _Parser(prog="biphase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("count", parents=[fmt], help="exact enumeration counts")
    c.add_argument("what", choices=("trees", "unicyclic", "forest", "oracle", "bound"))
    c.add_argument("--i", type=int, required=True)
    c.add_argument("--j", type=int, required=True)
    c.add_argument("--s", type=int)
    c.add_argument("--t", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--ell", type=int)
    c.add_argument("--c", type=float, default=100.0)
    c.set_defaults(func=cmd_count)

    e = sub.add_parser("expect", parents=[fmt], help="expected number of components of one shape")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--i", type=int, required=True)
    e.add_argument("--j", type=int, required=True)
    e.add_argument("--ell", type=int, required=True)
    e.add_argument("--count", type=str, help="override the count (decimal integer)")
    e.add_argument("--c", type=float, default=100.0, help="constant in the complex bound")
    e.set_defaults(func=cmd_expect)

    s = sub.add_parser("scalar", parents=[fmt], help="scalar predictions")
    s.add_argument("quantity", choices=("delta", "eps-prime", "lambda", "nu", "threshold", "giant", "excess"))
    s.add_argument("--eps", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--r1", type=float, default=0.0)
    s.add_argument("--r2", type=float, default=1.0)
    s.add_argument("--u1", type=float, default=1.0)
    s.add_argument("--u2", type=float, default=2.0)
    s.set_defaults(func=cmd_scalar)

    g = sub.add_parser("sample", parents=[fmt], help="draw one G(n, n, (1+eps)/n) and print its census")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--eps", type=float, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--dump-edges", metavar="PATH", nargs="?", const="-",
                   help="write 'u v' edge lines to PATH (stdout if omitted; census is then suppressed)")
    g.set_defaults(func=cmd_sample)

    x = sub.add_parser("experiment", parents=[fmt], help="run a Monte Carlo experiment")
    x.add_argument("name")
    x.add_argument("--config")
    x.add_argument("--set", action="append", metavar="KEY=VALUE")
    x.add_argument("--n", type=int)
    x.add_argument("--eps", type=float)
    x.add_argument("--trials", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--threads", type=int, default=1)
    x.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    x.set_defaults(func=cmd_experiment)

    t = sub.add_parser("selftest", parents=[fmt], help="oracle-equivalence suite")
    t.set_defaults(func=cmd_selftest)
    return parser


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sample" and args.seed is None:
            args.seed = default_seed()
        return args.func(args, out)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except (nc.DomainError, en.OracleBudgetError, IndexError, OSError) as err:
        print(f"biphase: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as err:  # --help
        return int(err.code or 0)


def main() -> int:
    return run(sys.argv[1:])
