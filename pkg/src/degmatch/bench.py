"""Experiment runner: generates correlated instances, runs a matcher per
trial, scores accuracy against the planted permutation, and writes result and
summary CSV files."""

from __future__ import annotations

import csv
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .advanced import DenseParams, SparseParams, match_dense, match_sparse
from .baselines import match_degree_sort, match_qp, match_spectral
from .dp import match_degree_profile
from .graph import Graph, MatchResult, Permutation, accuracy, apply_permutation, ingest_edge_list
from .models import (CorrelatedErParams, WignerParams, sample_correlated_er,
                     sample_correlated_wigner, substream)
from .profiles import ProfileConfig
from .refine import iterative_cleanup
from .seeded import SeedMap, estimate_edge_probability, seeded_match

CSV_HEADER = ["model", "n", "param_name", "param_value", "algo", "trial",
              "seed", "accuracy", "runtime_ms", "status"]

ALGORITHMS = ("dp", "dp-plus", "dense", "sparse", "seeded", "degree",
              "spectral", "sp-plus", "qp", "qp-plus")

# Substream purposes local to the harness.
_PURPOSE_RUN = 10
_PURPOSE_SUBSAMPLE_A = 11
_PURPOSE_SUBSAMPLE_B = 12
_PURPOSE_RELABEL = 13
_PURPOSE_SEEDS = 14


@dataclass(frozen=True)
class ExperimentConfig:
    """Benchmark description. ``sweep`` holds subsampling probabilities s for
    the er/file models and noise magnitudes sigma for the wigner model. For
    the er model, ``q`` is the parent-graph edge probability (each observed
    graph then has marginal edge probability q*s, mirroring the protocol of
    sweeping the deletion probability at fixed parent density)."""

    model: str
    n: int
    sweep: tuple[float, ...]
    algo: str
    q: float = 0.0
    distance: str = "w1"
    bins: int | None = None
    use_outdegrees: bool = False
    trials: int = 10
    seed: int = 0
    cleanup_iters: int = 100
    seeds: int = 0
    input_path: str | None = None
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.model not in ("er", "wigner", "file"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algo {self.algo!r}")
        if len(self.sweep) == 0:
            raise ValueError("sweep must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.model == "er" and not (0.0 < self.q <= 1.0):
            raise ValueError("er model requires parent edge probability q in (0, 1]")
        if self.model == "file" and not self.input_path:
            raise ValueError("file model requires input_path")

    @property
    def param_name(self) -> str:
        return "sigma" if self.model == "wigner" else "s"


@dataclass(frozen=True)
class ResultRow:
    model: str
    n: int
    param_name: str
    param_value: float
    algo: str
    trial: int
    seed: int
    accuracy: float
    runtime_ms: float
    status: str


def run_seed(master_seed: int, point_index: int, trial: int) -> int:
    """Deterministic per-(sweep point, trial) seed; independent of scheduling."""
    ss = np.random.SeedSequence(master_seed,
                                spawn_key=(_PURPOSE_RUN, point_index, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def subsample_graph(g: Graph, s: float, seed: int) -> Graph:
    """Keep each edge independently with probability s (vertex set unchanged)."""
    if not (0.0 <= s <= 1.0):
        raise ValueError("s must lie in [0, 1]")
    edges = g.edges()
    keep = substream(seed, 0).random(edges.shape[0]) < s
    return Graph.from_edge_array(g.n, edges[keep])


def _sample_instance(config: ExperimentConfig, value: float, seed: int,
                     parent: Graph | None):
    if config.model == "er":
        params = CorrelatedErParams(n=config.n, q=config.q * value, s=value,
                                    seed=seed)
        return sample_correlated_er(params)
    if config.model == "wigner":
        return sample_correlated_wigner(WignerParams(config.n, value, seed))
    assert parent is not None
    seed_a = int(substream(seed, _PURPOSE_SUBSAMPLE_A).integers(0, 2 ** 62))
    seed_b = int(substream(seed, _PURPOSE_SUBSAMPLE_B).integers(0, 2 ** 62))
    a = subsample_graph(parent, value, seed_a)
    b_aligned = subsample_graph(parent, value, seed_b)
    pi_star = Permutation.random(parent.n, substream(seed, _PURPOSE_RELABEL))
    return a, apply_permutation(b_aligned, pi_star), pi_star


def _marginal_q(config: ExperimentConfig, value: float, a, b) -> float:
    if config.model == "er":
        return config.q * value
    if config.model == "file":
        return max(estimate_edge_probability(a, b), 1e-12)
    return 0.5  # unused by the matrix profile path


def _profile_config(config: ExperimentConfig, q: float) -> ProfileConfig:
    return ProfileConfig(q=min(max(q, 1e-12), 1 - 1e-12), L=config.bins,
                         mode="outdegree" if config.use_outdegrees else "plain",
                         distance=config.distance)


def _run_algorithm(config: ExperimentConfig, value: float, seed: int,
                   a, b, pi_star: Permutation) -> MatchResult:
    algo = config.algo
    q = _marginal_q(config, value, a, b)
    s_val = value if config.model != "wigner" else 1.0 - value ** 2
    if algo in ("dp", "dp-plus"):
        cfg = _profile_config(config, q)
        result = match_degree_profile(a, b, cfg, strict=True, fallback=True)
    elif algo == "dense":
        result = match_dense(a, b, DenseParams(q=q, s=min(s_val, 1 - 1e-9)),
                             strict=True, fallback=True)
    elif algo == "sparse":
        result = match_sparse(a, b, SparseParams(q=q, L=config.bins),
                              strict=True, fallback=True)
    elif algo == "seeded":
        count = config.seeds if config.seeds > 0 else max(
            1, int(np.ceil(3 * np.log(max(a.n, 2)) / max(q * s_val, 1e-9))))
        rng = substream(seed, _PURPOSE_SEEDS)
        chosen = rng.choice(a.n, size=min(count, a.n), replace=False)
        seeds = SeedMap.from_permutation(pi_star, chosen.tolist())
        result = seeded_match(a, b, seeds, q=q, s=s_val, strict=True,
                              fallback=True)
    elif algo == "degree":
        result = match_degree_sort(a, b)
    elif algo in ("spectral", "sp-plus"):
        result = match_spectral(a, b)
    elif algo in ("qp", "qp-plus"):
        result = match_qp(a, b)
    else:  # pragma: no cover - caught in config validation
        raise ValueError(algo)
    if algo.endswith("-plus") and result.ok:
        cleaned = iterative_cleanup(a, b, result.permutation,
                                    max_iters=config.cleanup_iters)
        result = MatchResult.success(cleaned, **dict(result.info))
    return result


def _execute(config: ExperimentConfig, point_index: int, trial: int,
             parent: Graph | None) -> ResultRow:
    value = config.sweep[point_index]
    seed = run_seed(config.seed, point_index, trial)
    start = time.perf_counter()
    a, b, pi_star = _sample_instance(config, value, seed, parent)
    try:
        result = _run_algorithm(config, value, seed, a, b, pi_star)
    except Exception:
        result = None
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    if result is not None and result.ok:
        acc = accuracy(result.permutation, pi_star)
        status = "fallback" if result.info.get("fallback") else "ok"
    else:
        acc = 0.0
        status = "failed"
    return ResultRow(config.model, a.n, config.param_name, value, config.algo,
                     trial, seed, acc, elapsed_ms, status)


def _execute_packed(args) -> ResultRow:
    config, point_index, trial = args
    return _execute(config, point_index, trial, None)


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run every (sweep value, trial) cell and write result/summary CSVs when
    an output path is configured. Re-running with the same config and master
    seed reproduces the rows exactly (runtimes aside)."""
    parent: Graph | None = None
    if config.model == "file":
        with open(config.input_path) as fh:
            parent, _ = ingest_edge_list(fh)
    tasks = [(pi, t) for pi in range(len(config.sweep))
             for t in range(config.trials)]
    if config.workers > 1 and config.model != "file":
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_execute_packed,
                                 [(config, pi, t) for pi, t in tasks]))
    else:
        rows = [_execute(config, pi, t, parent) for pi, t in tasks]
    rows.sort(key=lambda r: (config.sweep.index(r.param_value), r.trial))
    if config.output_path:
        write_results_csv(config.output_path, rows)
        write_summary_csv(summary_path(config.output_path), rows)
    return rows


def summary_path(output_path: str) -> str:
    p = Path(output_path)
    return str(p.with_name(p.stem + ".summary.csv"))


def _fmt(x: float) -> str:
    return format(x, ".10g")


def write_results_csv(path: str, rows: Sequence[ResultRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.model, r.n, r.param_name, _fmt(r.param_value),
                             r.algo, r.trial, r.seed, _fmt(r.accuracy),
                             _fmt(r.runtime_ms), r.status])


def write_summary_csv(path: str, rows: Sequence[ResultRow]) -> None:
    groups: dict[tuple, list[float]] = {}
    meta: dict[tuple, ResultRow] = {}
    for r in rows:
        key = (r.model, r.n, r.param_name, r.param_value, r.algo)
        groups.setdefault(key, []).append(r.accuracy)
        meta[key] = r
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "n", "param_name", "param_value", "algo",
                         "trials", "median_accuracy"])
        for key in sorted(groups, key=lambda k: (k[4], k[3])):
            accs = groups[key]
            writer.writerow([key[0], key[1], key[2], _fmt(key[3]), key[4],
                             len(accs), _fmt(statistics.median(accs))])


def median_accuracy(rows: Sequence[ResultRow], param_value: float) -> float:
    accs = [r.accuracy for r in rows if r.param_value == param_value]
    if not accs:
        raise ValueError(f"no rows at param value {param_value}")
    return float(statistics.median(accs))
