"""Command-line front end.

    chebyprop query --graph g.txt --kernel ppr:alpha=0.2 --algo chebypush --source 0 --eps-a 1e-7
    chebyprop truth --graph g.txt --kernel hkpr:t=5 --sources uniform:10
    chebyprop bench --graph g.txt --kernel ppr:alpha=0.2 --sources topdeg:10 --grid 1e-3,1e-5,1e-7

Exit status: 0 on success, 2 on usage errors (bad flags, unknown algorithm
or kernel), 1 on file errors.

Bench CSV columns, one row per (algorithm, source, parameter) in that nesting
order: dataset, algorithm, kernel, source, param, l1, l2, deg_norm_inf,
wall_time, iterations, push_work. ``param`` echoes the grid entry as typed;
it is eps for pw/chebypower, the push threshold for push, eps_a for
chebypush and eps_r for chebypush-rw. ``source`` is the node label from
the input file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bidirectional import RandomWalkConfig, cheby_push_rw
from .eval import cached_ground_truth, measure, select_sources, truth_truncation
from .graph import (CSR_MAGIC, Graph, GraphFormatError, GraphStructureError, load_edge_list,
                    read_csr_cache)
from .kernels import Kernel, parse_kernel, plan_truncation
from .solvers import cheby_power, cheby_push, power_method, push

ALGORITHMS = ("pw", "push", "chebypower", "chebypush", "chebypush-rw")
BENCH_DEFAULT = ("pw", "push", "chebypower", "chebypush")
CSV_FIELDS = ("dataset", "algorithm", "kernel", "source", "param", "l1", "l2",
              "deg_norm_inf", "wall_time", "iterations", "push_work")
TOP = 50


class UsageError(Exception):
    pass


def load_graph(path) -> Graph:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == CSR_MAGIC:
        return read_csr_cache(path)
    return load_edge_list(path)


def _node(g: Graph, label) -> int:
    hit = np.flatnonzero(g.labels == int(label))
    if hit.size == 0:
        raise UsageError(f"node {label} is not in the graph")
    return int(hit[0])


def parse_sources(g: Graph, spec: str, seed: int) -> list:
    """``uniform:k``, ``topdeg:k`` or a comma separated list of node labels."""
    kind, sep, count = spec.partition(":")
    if sep:
        strategy = {"uniform": "uniform", "topdeg": "top_degree",
                    "top_degree": "top_degree"}.get(kind)
        if strategy is None:
            raise UsageError(f"unknown source strategy {kind!r}")
        try:
            return select_sources(g, strategy, int(count), seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        return [_node(g, tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"bad source list {spec!r}") from None


def _grid(text: str) -> list:
    items = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not items:
        raise UsageError("empty parameter grid")
    try:
        values = [float(tok) for tok in items]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if any(v < 0 for v in values):
        raise UsageError("grid values must be nonnegative")
    return list(zip(items, values))


def _ppr_alpha(kernel: Kernel) -> float:
    if kernel.family != "ppr":
        raise UsageError("chebypush-rw needs a ppr kernel")
    return kernel.alpha


def run_query(g: Graph, kernel: Kernel, algo: str, s: int, *, eps=None, eps_a=None,
              eps_r=0.5, delta=None, seed=0):
    """Single query with the CLI's parameter conventions.

    pw/chebypower truncate at ``plan_truncation(eps)``. push uses the
    constant threshold ``eps_a`` and chebypush the error target ``eps_a``;
    both truncate at ``plan_truncation(eps)`` when ``eps`` is given and at
    ``plan_truncation(eps_a / 2)`` otherwise.
    """
    if algo in ("pw", "chebypower"):
        plan = plan_truncation(kernel, 1e-7 if eps is None else eps)
        if algo == "pw":
            return power_method(g, kernel, s, plan.N)
        return cheby_power(g, kernel, s, plan.K)
    if algo in ("push", "chebypush"):
        eps_a = 1e-7 if eps_a is None else eps_a
        if eps is None:
            eps = eps_a / 2 if eps_a > 0 else 1e-12
        plan = plan_truncation(kernel, eps)
        if algo == "push":
            return push(g, kernel, s, plan.N, eps_a)
        return cheby_push(g, kernel, s, plan.K, eps_a)
    if algo == "chebypush-rw":
        cfg = RandomWalkConfig.build(_ppr_alpha(kernel), g.n, eps_r, delta, seed)
        return cheby_push_rw(g, kernel.alpha, s, cfg)
    raise UsageError(f"unknown algorithm {algo!r}")


def _jsonable(stats: dict) -> dict:
    out = {}
    for key, val in stats.items():
        if isinstance(val, dict):
            out[key] = _jsonable(val)
        elif isinstance(val, (np.integer,)):
            out[key] = int(val)
        elif isinstance(val, (np.floating,)):
            out[key] = float(val)
        elif isinstance(val, (int, float, str, bool)) or val is None:
            out[key] = val
    return out


def _open_out(path, newline=None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=newline), True


def cmd_query(args) -> int:
    g = load_graph(args.graph)
    kernel = parse_kernel(args.kernel)
    s = _node(g, args.source)
    est = run_query(g, kernel, args.algo, s, eps=args.eps, eps_a=args.eps_a,
                    eps_r=args.eps_r, delta=args.delta, seed=args.alpha_walks_seed)
    y = est.y_hat
    order = np.lexsort((np.arange(g.n), -y))[:TOP]
    doc = dict(graph=str(args.graph), kernel=kernel.descriptor(), algorithm=args.algo,
               source=int(g.labels[s]),
               top=[[int(g.labels[u]), float(y[u])] for u in order],
               stats=_jsonable(est.stats))
    fh, close = _open_out(args.out)
    try:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_truth(args) -> int:
    g = load_graph(args.graph)
    kernel = parse_kernel(args.kernel)
    sources = parse_sources(g, args.sources, args.seed)
    made = 0
    for s in sources:
        _, generated = cached_ground_truth(g, kernel, s, args.cache_dir)
        made += generated
    print(f"{len(sources)} sources, {made} generated, {len(sources) - made} cached",
          file=sys.stderr)
    return 0


def _bench_cells(g, kernel, algo, s, truth, grid, K_fixed, N_fixed, args):
    rows = []
    for text, p in grid:
        if algo == "pw":
            N = plan_truncation(kernel, p).N if 0 < p < 1 else truth_truncation(kernel)
            est = power_method(g, kernel, s, N)
        elif algo == "chebypower":
            K = plan_truncation(kernel, p).K if 0 < p < 1 else K_fixed
            est = cheby_power(g, kernel, s, K)
        elif algo == "push":
            est = push(g, kernel, s, N_fixed, p)
        elif algo == "chebypush":
            est = cheby_push(g, kernel, s, K_fixed, p)
        else:
            if not 0 < p < 1:
                raise UsageError("chebypush-rw grid values are eps_r in (0, 1)")
            cfg = RandomWalkConfig.build(_ppr_alpha(kernel), g.n, p, args.delta,
                                         args.alpha_walks_seed)
            est = cheby_push_rw(g, kernel.alpha, s, cfg)
        err = measure(truth.vector, est.y_hat, g)
        rows.append(dict(algorithm=algo, source=int(g.labels[s]), param=text,
                         l1=repr(err.l1), l2=repr(err.l2), deg_norm_inf=repr(err.deg_norm_inf),
                         wall_time=f"{est.stats['wall_time']:.6f}",
                         iterations=est.stats["iterations"], push_work=est.stats["push_work"]))
    return rows


def cmd_bench(args) -> int:
    grid = _grid(args.grid)
    algos = args.algo or list(BENCH_DEFAULT)
    g = load_graph(args.graph)
    kernel = parse_kernel(args.kernel)
    if "chebypush-rw" in algos:
        _ppr_alpha(kernel)
    sources = parse_sources(g, args.sources, args.seed)
    dataset = args.dataset or Path(args.graph).stem
    positive = [p for _, p in grid if 0 < p < 1]
    eps = args.eps if args.eps is not None else (min(positive) / 2 if positive else 1e-12)
    plan = plan_truncation(kernel, eps)
    truths = {s: cached_ground_truth(g, kernel, s, args.cache_dir)[0] for s in sources}

    def cell(job):
        algo, s = job
        return _bench_cells(g, kernel, algo, s, truths[s], grid, plan.K, plan.N, args)

    jobs = [(algo, s) for algo in algos for s in sources]
    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            results = list(pool.map(cell, jobs))
    else:
        results = [cell(job) for job in jobs]

    fh, close = _open_out(args.out, newline="")
    try:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rows in results:
            for row in rows:
                writer.writerow(dict(row, dataset=dataset, kernel=kernel.descriptor()))
    finally:
        if close:
            fh.close()
    return 0


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebyprop",
                                     description="Graph propagation queries and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--graph", required=True, help="edge list or binary CSR file")
        p.add_argument("--kernel", required=True,
                       help="ppr:alpha=A, hkpr:t=T or custom:file=coeffs.json")
        p.add_argument("--cache-dir", default=None,
                       help="ground-truth cache (default $CHEBYPROP_CACHE_DIR)")

    def walks(p):
        p.add_argument("--delta", type=float, default=None, help="default 1/n")
        p.add_argument("--alpha-walks-seed", type=int, default=0)

    q = sub.add_parser("query", help="run one query, write JSON")
    common(q)
    walks(q)
    q.add_argument("--algo", required=True, choices=ALGORITHMS)
    q.add_argument("--source", required=True, type=int, help="node label")
    q.add_argument("--eps", type=float, default=None, help="truncation tolerance")
    q.add_argument("--eps-a", type=float, default=None, help="push error target")
    q.add_argument("--eps-r", type=float, default=0.5, help="relative error for chebypush-rw")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_query)

    t = sub.add_parser("truth", help="generate cached ground truth")
    common(t)
    t.add_argument("--sources", required=True, help="uniform:k, topdeg:k or id list")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_truth)

    b = sub.add_parser("bench", help="sweep a parameter grid, write CSV")
    common(b)
    walks(b)
    b.add_argument("--algo", action="append", choices=ALGORITHMS,
                   help="repeatable; default pw, push, chebypower, chebypush")
    b.add_argument("--sources", required=True, help="uniform:k, topdeg:k or id list")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--grid", required=True, help="comma separated parameter values")
    b.add_argument("--eps", type=float, default=None,
                   help="truncation for push/chebypush (default half the smallest grid value)")
    b.add_argument("--dataset", default=None)
    b.add_argument("--threads", type=_positive_int, default=1)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, GraphFormatError, GraphStructureError) as exc:
        print(f"chebyprop: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
