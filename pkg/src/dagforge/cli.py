"""``dagforge`` command line: ``gen``, ``tables`` and ``stats``.

Exit codes: 0 success, 1 table-cache failure, 2 usage or input error,
3 statistical test failed.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import sqrt

from dagforge import __version__
from dagforge.baselines import (
    McmcConfig,
    MarkovChain,
    is_acyclic,
    is_weakly_connected,
    sample_triangular,
)
from dagforge.cache import TableCacheError, load_table, save_table
from dagforge.counting import (
    CountTable,
    build_children_limited_table,
    build_count_table,
    build_restricted_table,
    build_weighted_table,
)
from dagforge.dag import Dag
from dagforge.formats import FORMATS, FormatError, parse_stream, write_stream
from dagforge.oracle_stats import (
    MAX_ENUMERATION_N,
    Histogram,
    chi_square_uniformity,
    classify_outpoints,
    enumerate_all_dags,
    pool_sparse,
    two_sample_test,
    uniform_expectation,
)
from dagforge.restricted import (
    sample_children_limited_dag,
    sample_max_in_dag,
    sample_weighted_dag,
)
from dagforge.rng import RandomSource
from dagforge.sample_exact import sample_uniform_dag
from dagforge.sample_limit import DEFAULT_N_SWITCH, build_limit_tables, sample_large_dag

EXIT_OK, EXIT_CACHE, EXIT_USAGE, EXIT_STAT_FAIL = 0, 1, 2, 3
EXACT_DEFAULT_MAX = 100
TABLES_ENV = "DAGFORGE_TABLES"


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        p = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    if not 0 <= p <= 1:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {text}")
    return p


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


# gen -----------------------------------------------------------------------

class Generator:
    """Everything needed to draw sample ``i``; rebuilt once per worker process."""

    def __init__(self, opts: dict):
        self.opts = opts
        self.n = opts["nodes"]
        self.method = opts["method"]
        self.table: CountTable | None = None
        self.wtable = None
        self.limit = None
        self._prepare()

    def _table(self, variant: str, n_max: int, **params) -> CountTable:
        path = self.opts.get("tables_file")
        if path:
            table = load_table(path)
            wanted = {"K": params.get("K"), "K_n": params.get("K_n")}
            if table.variant != variant or {"K": table.K, "K_n": table.K_n} != wanted:
                raise UsageError(
                    f"tables file holds {table.describe()}, need variant={variant} {wanted}"
                )
            if table.n_max < n_max:
                raise UsageError(f"tables file covers n <= {table.n_max}, need {n_max}")
            return table
        if variant == "unrestricted":
            return build_count_table(n_max, limit=None)
        if variant in ("max_in", "max_in_out"):
            return build_restricted_table(n_max, params["K"], params.get("K_n"), limit=None)
        return build_children_limited_table(n_max, params["K"], limit=None)

    def _prepare(self) -> None:
        o, n = self.opts, self.n
        if self.method in ("exact", "hybrid") and o["edge_prob"] is not None:
            self.wtable = build_weighted_table(n, o["edge_prob"], limit=None)
        elif o["max_in"] is not None:
            variant = "max_in" if o["max_out_nonoutpoints"] is None else "max_in_out"
            self.table = self._table(variant, n, K=o["max_in"], K_n=o["max_out_nonoutpoints"])
        elif o["max_children"] is not None or o["max_parents"] is not None:
            K = o["max_children"] if o["max_children"] is not None else o["max_parents"]
            self.table = self._table("max_children", n, K=K)
        elif self.method == "exact":
            self.table = self._table("unrestricted", n)
        elif self.method == "hybrid":
            self.limit = build_limit_tables(o["n_switch"])
            self.table = self._table("unrestricted", o["n_switch"])

    def sample(self, i: int) -> Dag:
        rng = RandomSource.split(self.opts["seed"], i)
        while True:
            dag = self._draw(rng)
            if not self.opts["connected"] or is_weakly_connected(dag):
                return dag

    def _draw(self, rng: RandomSource) -> Dag:
        o, n = self.opts, self.n
        if self.method == "triangular":
            p = o["edge_prob"] if o["edge_prob"] is not None else Fraction(1, 2)
            return sample_triangular(n, p, rng)
        if self.wtable is not None:
            return sample_weighted_dag(n, self.wtable, rng)
        if self.table is not None and self.table.variant in ("max_in", "max_in_out"):
            return sample_max_in_dag(n, self.table, rng)
        if self.table is not None and self.table.variant == "max_children":
            dag = sample_children_limited_dag(n, self.table, rng, strategy=o["strategy"])
            return dag.reversed() if o["max_parents"] is not None else dag
        if self.method == "hybrid":
            return sample_large_dag(n, self.limit, self.table, rng)
        return sample_uniform_dag(n, self.table, rng)


_WORKER: Generator | None = None


def _worker_init(opts: dict) -> None:
    global _WORKER
    _WORKER = Generator(opts)


def _worker_sample(i: int) -> Dag:
    return _WORKER.sample(i)


def _gen_options(args: argparse.Namespace) -> dict:
    n = args.nodes
    method = args.method or ("exact" if n <= EXACT_DEFAULT_MAX else "hybrid")
    restricted = [
        name
        for name, val in (
            ("--max-in", args.max_in),
            ("--max-children", args.max_children),
            ("--max-parents", args.max_parents),
        )
        if val is not None
    ]
    if args.edge_prob is not None and method != "triangular":
        restricted.append("--edge-prob")
    if len(restricted) > 1:
        raise UsageError(f"choose at most one of {', '.join(restricted)}")
    if args.max_out_nonoutpoints is not None and args.max_in is None:
        raise UsageError("--max-out-nonoutpoints requires --max-in")
    if restricted and method not in ("exact",):
        if args.method is not None:
            raise UsageError(f"{restricted[0]} needs --method exact")
        method = "exact"
    if method == "mcmc" and args.burn_in is None:
        raise UsageError("--method mcmc needs an explicit --burn-in (O(n^4) steps is the usual guidance)")
    if method == "exact" and n > 200 and not args.tables_file and not restricted:
        raise UsageError(
            f"n={n} is too large for exact tables built on the fly; use --method hybrid "
            "or supply --tables-file"
        )
    return {
        "nodes": n,
        "method": method,
        "seed": args.seed if args.seed is not None else secrets.randbits(64),
        "edge_prob": args.edge_prob,
        "connected": args.connected,
        "max_in": args.max_in,
        "max_out_nonoutpoints": args.max_out_nonoutpoints,
        "max_children": args.max_children,
        "max_parents": args.max_parents,
        "strategy": args.strategy,
        "n_switch": args.n_switch,
        "tables_file": args.tables_file or os.environ.get(TABLES_ENV) or None,
        "burn_in": args.burn_in,
        "thin": args.thin,
        "prune_self_pairs": args.prune_self_pairs,
    }


def _mcmc_stream(opts: dict, count: int):
    cfg = McmcConfig(opts["burn_in"], opts["thin"], opts["prune_self_pairs"])
    chain = MarkovChain(opts["nodes"], cfg, RandomSource.split(opts["seed"], 0))
    yield from chain.samples(count)


def cmd_gen(args: argparse.Namespace) -> int:
    opts = _gen_options(args)
    if opts["method"] == "mcmc":
        dags = _mcmc_stream(opts, args.count)
        executor = None
    elif args.jobs > 1:
        executor = ProcessPoolExecutor(args.jobs, initializer=_worker_init, initargs=(opts,))
        dags = executor.map(_worker_sample, range(args.count), chunksize=max(1, args.count // (8 * args.jobs)))
    else:
        gen = Generator(opts)
        dags = (gen.sample(i) for i in range(args.count))
        executor = None
    try:
        out = sys.stdout
        for chunk in write_stream(dags, args.format):
            out.write(chunk)
        out.flush()
    finally:
        if executor is not None:
            executor.shutdown()
    return EXIT_OK


# tables --------------------------------------------------------------------

def cmd_tables(args: argparse.Namespace) -> int:
    variant = args.variant.replace("-", "_")
    if variant != "unrestricted" and args.K is None:
        raise UsageError(f"--variant {args.variant} needs --K")
    if variant == "max_in_out" and args.K_n is None:
        raise UsageError("--variant max-in-out needs --K-n")
    if variant == "unrestricted":
        table = build_count_table(args.max_n, limit=None)
    elif variant in ("max_in", "max_in_out"):
        table = build_restricted_table(args.max_n, args.K, args.K_n if variant == "max_in_out" else None, limit=None)
    else:
        table = build_children_limited_table(args.max_n, args.K, limit=None)
    try:
        save_table(table, args.out)
    except OSError as exc:
        raise TableCacheError(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {table.describe()} to {args.out}", file=sys.stderr)
    return EXIT_OK


# stats ---------------------------------------------------------------------

def _read_dags(paths: list[str], fmt: str | None) -> list[Dag]:
    dags: list[Dag] = []
    for path in paths or ["-"]:
        if path == "-":
            text = sys.stdin.read()
        else:
            try:
                with open(path) as fh:
                    text = fh.read()
            except OSError as exc:
                raise UsageError(f"cannot read {path}: {exc}") from exc
        dags.extend(parse_stream(text, fmt))
    return dags


def _check_nodes(dags: list[Dag], n: int | None) -> int:
    if not dags:
        raise UsageError("no DAGs in input")
    sizes = {d.n for d in dags}
    if n is None:
        if len(sizes) != 1:
            raise UsageError(f"input mixes sizes {sorted(sizes)}; pass --nodes")
        return sizes.pop()
    if sizes != {n}:
        raise UsageError(f"input has sizes {sorted(sizes)}, expected {n}")
    return n


def _report(args: argparse.Namespace, result: dict) -> int:
    passed = result["result"] == "pass"
    if args.json:
        print(json.dumps(result, sort_keys=True))
    else:
        print(" ".join(f"{k}={v}" for k, v in result.items()))
    return EXIT_OK if passed else EXIT_STAT_FAIL


def _outpoint_reference(n: int, reference: str) -> dict[int, float]:
    if reference == "exact":
        if n > 200:
            raise UsageError("exact outpoint reference is limited to n <= 200")
        table = build_count_table(n, limit=None)
        return {k: table.a[n][k] / table.total[n] for k in range(1, n + 1)}
    lt = build_limit_tables(max(DEFAULT_N_SWITCH, 8))
    return dict(lt.A)


def cmd_stats(args: argparse.Namespace) -> int:
    dags = _read_dags(args.inputs, args.format)
    if args.test == "acyclic":
        bad = sum(1 for d in dags if not is_acyclic(d))
        return _report(args, {
            "test": "acyclic", "trials": len(dags), "cyclic": bad,
            "result": "pass" if bad == 0 and dags else "fail",
        })

    if args.test == "uniformity":
        n = _check_nodes(dags, args.nodes)
        if n > MAX_ENUMERATION_N:
            raise UsageError(f"uniformity needs the exhaustive list, n <= {MAX_ENUMERATION_N}")
        hist = Histogram.of_dags(n, dags)
        stat, p = chi_square_uniformity(hist, uniform_expectation(enumerate_all_dags(n)))
        return _report(args, {
            "test": "uniformity", "n": n, "trials": hist.trials, "statistic": round(stat, 6),
            "p_value": p, "alpha": args.alpha, "result": "pass" if p > args.alpha else "fail",
        })

    if args.test == "outpoints":
        n = _check_nodes(dags, args.nodes)
        reference = args.reference or ("limit" if n >= DEFAULT_N_SWITCH else "exact")
        expected = _outpoint_reference(n, reference)
        hist = Histogram.of_values(n, (classify_outpoints(d) for d in dags))
        trials = hist.trials
        worst = 0.0
        for k, pk in expected.items():
            sd = sqrt(trials * pk * (1 - pk))
            if sd > 0:
                worst = max(worst, abs(hist.counts.get(k, 0) - trials * pk) / sd)
            elif hist.counts.get(k, 0):
                worst = float("inf")
        stray = sum(c for k, c in hist.counts.items() if k not in expected)
        ok = worst <= args.sigma and stray == 0
        freqs = {k: hist.counts.get(k, 0) / trials for k in sorted(expected) if expected[k] > 0}
        return _report(args, {
            "test": "outpoints", "n": n, "trials": trials, "reference": reference,
            "max_abs_z": round(worst, 4), "sigma": args.sigma,
            "frequencies": json.dumps(freqs, separators=(",", ":")) if not args.json else freqs,
            "result": "pass" if ok else "fail",
        })

    # compare
    if len(args.inputs) != 2:
        raise UsageError("compare needs exactly two input files")
    first = _read_dags([args.inputs[0]], args.format)
    second = _read_dags([args.inputs[1]], args.format)
    n = _check_nodes(first + second, args.nodes)
    marginal = {
        "dag": lambda d: d.key(),
        "outpoints": classify_outpoints,
        "edges": lambda d: d.num_edges,
    }[args.marginal]
    ha = Histogram.of_values(n, map(marginal, first))
    hb = Histogram.of_values(n, map(marginal, second))
    stat, p = two_sample_test(*pool_sparse(ha, hb))
    return _report(args, {
        "test": "compare", "marginal": args.marginal, "n": n, "trials": f"{ha.trials}+{hb.trials}",
        "statistic": round(stat, 6), "p_value": p, "alpha": args.alpha,
        "result": "pass" if p > args.alpha else "fail",
    })


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random DAGs")
    g.add_argument("--nodes", type=_positive, required=True)
    g.add_argument("--count", type=_nonnegative, default=1)
    g.add_argument("--seed", type=int)
    g.add_argument("--method", choices=("exact", "hybrid", "mcmc", "triangular"))
    g.add_argument("--format", choices=FORMATS, default="edgelist")
    g.add_argument("--connected", action="store_true")
    g.add_argument("--max-in", type=_positive, metavar="K")
    g.add_argument("--max-out-nonoutpoints", type=_nonnegative, metavar="Kn")
    g.add_argument("--max-children", type=_positive, metavar="K")
    g.add_argument("--max-parents", type=_positive, metavar="K")
    g.add_argument("--strategy", choices=("auto", "counts", "marking"), default="auto",
                   help="reconstruction strategy for children/parents limits")
    g.add_argument("--edge-prob", type=_fraction, metavar="NUM/DEN")
    g.add_argument("--n-switch", type=int, default=DEFAULT_N_SWITCH)
    g.add_argument("--burn-in", type=_nonnegative, metavar="B")
    g.add_argument("--thin", type=_positive, default=1, metavar="T")
    g.add_argument("--prune-self-pairs", action="store_true")
    g.add_argument("--tables-file", metavar="PATH")
    g.add_argument("--jobs", type=_positive, default=1)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("tables", help="precompute and cache count tables")
    t.add_argument("--max-n", type=_positive, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--variant", choices=("unrestricted", "max-in", "max-in-out", "max-children"),
                   default="unrestricted")
    t.add_argument("--K", type=_positive)
    t.add_argument("--K-n", type=_nonnegative)
    t.set_defaults(func=cmd_tables)

    s = sub.add_parser("stats", help="statistical checks on DAG streams")
    s.add_argument("test", choices=("uniformity", "acyclic", "outpoints", "compare"))
    s.add_argument("inputs", nargs="*", help="files to read ('-' or none for stdin)")
    s.add_argument("--nodes", type=_positive)
    s.add_argument("--format", choices=FORMATS)
    s.add_argument("--alpha", type=float, default=0.001)
    s.add_argument("--sigma", type=float, default=3.5)
    s.add_argument("--reference", choices=("exact", "limit"))
    s.add_argument("--marginal", choices=("dag", "outpoints", "edges"), default="dag")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TableCacheError as exc:
        print(f"dagforge: table cache error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (UsageError, FormatError, ValueError) as exc:
        print(f"dagforge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
