"""Command-line entry points: generate instances, match edge-list files,
run benchmarks from a config file, and ingest SNAP edge lists.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .advanced import DenseParams, SparseParams, match_dense, match_sparse
from .baselines import match_degree_sort, match_qp, match_spectral
from .bench import ExperimentConfig, run_experiment
from .dp import match_degree_profile
from .graph import (Graph, Permutation, accuracy, ingest_edge_list,
                    parse_edge_pairs)
from .models import CorrelatedErParams, sample_correlated_er
from .profiles import ProfileConfig
from .refine import iterative_cleanup
from .seeded import estimate_edge_probability


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_edge_list(path: str, g: Graph, comment: str = "") -> None:
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def _write_permutation(path: str, p: Permutation) -> None:
    with open(path, "w") as fh:
        for i, k in enumerate(p.image):
            fh.write(f"{i} {k}\n")


def read_permutation(path: str) -> Permutation:
    image = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, k = line.split()
            image[int(i)] = int(k)
    return Permutation([image[i] for i in range(len(image))])


def _cmd_generate(args) -> int:
    params = CorrelatedErParams(n=args.n, q=args.q, s=args.s, seed=args.seed)
    a, b, pi_star = sample_correlated_er(params)
    _write_edge_list(args.out_a, a, f"correlated ER n={args.n} q={args.q} s={args.s}")
    _write_edge_list(args.out_b, b, f"correlated ER n={args.n} q={args.q} s={args.s}")
    _write_permutation(args.out_truth, pi_star)
    print(f"wrote {a.num_edges} edges to {args.out_a}, "
          f"{b.num_edges} edges to {args.out_b}")
    return 0


def _load_graph(path: str, max_id: int | None, n: int | None) -> Graph:
    with open(path) as fh:
        if n is None:
            g, _ = ingest_edge_list(fh, max_id)
            return g
        # Fixed vertex count: keep file ids as-is so isolated vertices and
        # the truth file stay aligned.
        return Graph.from_edge_array(n, parse_edge_pairs(fh, max_id))


def _cmd_match(args) -> int:
    a = _load_graph(args.graph_a, args.max_id, args.n)
    b = _load_graph(args.graph_b, args.max_id, args.n)
    if a.n != b.n:
        n = max(a.n, b.n)
        a = Graph.from_edge_array(n, a.edges())
        b = Graph.from_edge_array(n, b.edges())
    q = args.q if args.q is not None else max(estimate_edge_probability(a, b), 1e-9)
    if args.algo in ("dp", "dp-plus"):
        cfg = ProfileConfig(q=min(q, 1 - 1e-9), L=args.bins,
                            mode="outdegree" if args.outdegrees else "plain",
                            distance=args.distance)
        result = match_degree_profile(a, b, cfg, strict=True, fallback=True)
    elif args.algo == "dense":
        result = match_dense(a, b, DenseParams(q=q, s=args.s), fallback=True)
    elif args.algo == "sparse":
        result = match_sparse(a, b, SparseParams(q=q), fallback=True)
    elif args.algo == "degree":
        result = match_degree_sort(a, b)
    elif args.algo in ("spectral", "sp-plus"):
        result = match_spectral(a, b)
    elif args.algo in ("qp", "qp-plus"):
        result = match_qp(a, b)
    else:
        raise _UsageError(f"unknown algo {args.algo}")
    if not result.ok:
        print(f"matching failed: {result.failure_reason.value}", file=sys.stderr)
        return 2
    perm = result.permutation
    if args.algo.endswith("-plus"):
        perm = iterative_cleanup(a, b, perm, max_iters=args.cleanup_iters)
    if args.out:
        _write_permutation(args.out, perm)
    if args.truth:
        truth = read_permutation(args.truth)
        print(f"accuracy {accuracy(perm, truth):.6f}")
    else:
        print(f"matched {a.n} vertices")
    return 0


_CONFIG_TYPES = {
    "model": str, "algo": str, "distance": str, "input_path": str,
    "output_path": str, "n": int, "bins": int, "trials": int, "seed": int,
    "cleanup_iters": int, "seeds": int, "workers": int, "q": float,
    "use_outdegrees": lambda s: s.strip().lower() in ("1", "true", "yes"),
    "sweep": lambda s: tuple(float(tok) for tok in s.replace(",", " ").split()),
}


def parse_config_file(path: str) -> dict:
    values: dict = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{line_no}: expected key=value")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_TYPES:
                raise _UsageError(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = _CONFIG_TYPES[key](val.strip())
    return values


def _cmd_bench(args) -> int:
    values = parse_config_file(args.config)
    for override in args.set or []:
        if "=" not in override:
            raise _UsageError(f"--set expects key=value, got {override!r}")
        key, _, val = override.partition("=")
        key = key.strip()
        if key not in _CONFIG_TYPES:
            raise _UsageError(f"unknown config key {key!r}")
        values[key] = _CONFIG_TYPES[key](val.strip())
    if args.out:
        values["output_path"] = args.out
    try:
        config = ExperimentConfig(**values)
    except (TypeError, ValueError) as err:
        raise _UsageError(str(err)) from None
    rows = run_experiment(config)
    print(f"wrote {len(rows)} rows"
          + (f" to {config.output_path}" if config.output_path else ""))
    return 0


def _cmd_ingest(args) -> int:
    with open(args.input) as fh:
        g, id_map = ingest_edge_list(fh, args.max_id)
    _write_edge_list(args.out_edges, g, f"ingested from {args.input}")
    with open(args.out_map, "w") as fh:
        for ext, internal in sorted(id_map.items()):
            fh.write(f"{ext} {internal}\n")
    print(f"{g.n} vertices, {g.num_edges} edges")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="degmatch",
                     description="Graph matching via degree profiles")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a correlated ER instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True,
                   help="marginal edge probability of each observed graph")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    p.add_argument("--out-truth", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("match", help="match two edge-list files")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.add_argument("--n", type=int, default=None,
                   help="vertex count; keeps file ids as-is (default: "
                        "re-index the ids that appear)")
    p.add_argument("--algo", default="dp",
                   choices=["dp", "dp-plus", "dense", "sparse", "degree",
                            "spectral", "sp-plus", "qp", "qp-plus"])
    p.add_argument("--q", type=float, default=None,
                   help="edge probability (default: estimated from the inputs)")
    p.add_argument("--s", type=float, default=0.9,
                   help="assumed correlation for the dense matcher")
    p.add_argument("--distance", default="w1", choices=["w1", "binned_l1"])
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--outdegrees", action="store_true")
    p.add_argument("--cleanup-iters", type=int, default=100)
    p.add_argument("--max-id", type=int, default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("bench", help="run a benchmark from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config value (flags win)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("ingest", help="normalize a SNAP edge list")
    p.add_argument("--input", required=True)
    p.add_argument("--max-id", type=int, default=None)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-map", required=True)
    p.set_defaults(func=_cmd_ingest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
