#!/usr/bin/env python3
"""Pilot-calibration of the matcher constants that the analysis leaves as
"sufficiently large/small" absolutes.

Reproduces the measurements behind the shipped defaults:

* dense seeding (DenseParams): candidate rate alpha0, profile-threshold
  factor C_xi (applied to the median row-minimum of the candidate block),
  and the seed-count / fake-count trade-off;
* sparse similarity threshold (SparseParams.eta0): exactness on the
  noiseless class vs accuracy on the noisy class.

Usage: python scripts/calibrate_constants.py [--quick]
"""

from __future__ import annotations

import argparse
import math

import numpy as np

import degmatch as dm
from degmatch.advanced import DenseParams, SparseParams, _adaptive_xi, tau_threshold
from degmatch.dp import score_grid
from degmatch.profiles import ProfileConfig


def dense_seed_table(trials: int) -> None:
    print("== dense seeding: (true, fake) counts per trial ==")
    classes = [(300, 0.2, 1.0), (1000, 0.3, 0.995)]
    for n, q, s in classes:
        need = math.ceil(math.log(n) / q)
        for alpha0 in (2.0, 4.0, 8.0):
            for c_xi in (0.9, 1.0, 1.1):
                rows = []
                for t in range(trials):
                    a, b, pi = dm.sample_correlated_er(
                        dm.CorrelatedErParams(n, q, min(s, 1.0), seed=810 + t))
                    params = DenseParams(q=q, s=min(s, 1 - 1e-9),
                                         alpha0=alpha0, C_xi=c_xi)
                    grid = score_grid(a, b, ProfileConfig(
                        q=q, mode=params.mode, distance=params.distance))
                    tau = tau_threshold(n, q, params.seed_rate(n))
                    try:
                        xi = _adaptive_xi(grid.values, a.degrees, b.degrees,
                                          tau, tau + 1, c_xi)
                    except Exception:
                        rows.append((0, 0))
                        continue
                    sel = grid.values <= xi
                    cand = (a.degrees >= tau)[:, None] & (b.degrees >= tau + 1)[None, :]
                    sel &= cand
                    truth = np.zeros_like(sel)
                    truth[np.arange(n), pi.image] = True
                    rows.append((int((sel & truth).sum()),
                                 int((sel & ~truth).sum())))
                print(f"n={n} q={q} s={s} alpha0={alpha0} C_xi={c_xi} "
                      f"need>={need}: {rows}")


def sparse_eta_table(trials: int) -> None:
    print("== sparse eta0: accuracy per trial ==")
    classes = [(500, None, 1.0), (1000, None, 0.999)]
    for n, _, s in classes:
        q = 2 * math.log(n) / n
        for eta0 in (0.10, 0.12, 0.15, 0.20):
            accs = []
            for t in range(trials):
                a, b, pi = dm.sample_correlated_er(
                    dm.CorrelatedErParams(n, q, s, seed=900 + t))
                res = dm.match_sparse(a, b, SparseParams(q=q, eta0=eta0),
                                      fallback=True)
                accs.append(round(dm.accuracy(res.permutation, pi), 3)
                            if res.ok else 0.0)
            print(f"n={n} s={s} eta0={eta0}: {accs}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="3 trials per cell instead of 5")
    args = parser.parse_args()
    trials = 3 if args.quick else 5
    dense_seed_table(trials)
    sparse_eta_table(trials)


if __name__ == "__main__":
    main()
