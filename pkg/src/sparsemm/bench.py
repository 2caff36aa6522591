"""Benchmark harness: ring-operation counts first, wall time second."""

from __future__ import annotations

import csv
import io
import statistics
import time

from .algebra import CountingRing, ring_from_tag
from .instances import InstanceSpec, gen_instance, t_for
from .osmm import OsmmConfig, osmm_deterministic, osmm_randomized
from .sparse import dense_mm, sparse_mm
from .verify import VerifierConfig

ALGS = ("naive", "dense", "det", "rand")

FIELDS = [
    "n", "ring", "delta_in", "delta_out", "strategy", "seed", "alg",
    "nnz_A", "nnz_B", "nnz_AB", "t", "adds", "muls", "dense_muls", "mul_ratio",
    "wall_s", "correct",
]

# dense_mm is only executed up to this n; above it the cubic count is reported analytically.
DENSE_RUN_LIMIT = 96


def _run(alg, A, B, t, ring, seed):
    if alg == "naive":
        return sparse_mm(A, B, ring)
    if alg == "dense":
        return dense_mm(A, B, ring)
    if alg == "det":
        return osmm_deterministic(A, B, OsmmConfig(t=t), ring)
    if alg == "rand":
        return osmm_randomized(A, B, OsmmConfig(verifier=VerifierConfig(seed=seed)), ring)
    raise ValueError(f"unknown algorithm {alg!r}")


def bench_rows(grid, algs=ALGS, repeats: int = 1, warmup: bool = True):
    """Yield one result dict per (instance, algorithm)."""
    for spec in grid:
        base = ring_from_tag(spec.ring)
        A, B, C = gen_instance(spec, base)
        t = t_for(C)
        dense_muls = A.rows * A.cols * B.cols
        for alg in algs:
            row = {
                "n": spec.n, "ring": spec.ring, "delta_in": spec.delta_in, "delta_out": spec.delta_out,
                "strategy": spec.strategy, "seed": spec.seed, "alg": alg,
                "nnz_A": A.nnz, "nnz_B": B.nnz, "nnz_AB": C.nnz, "t": t, "dense_muls": dense_muls,
            }
            if alg == "dense" and spec.n > DENSE_RUN_LIMIT:
                row.update(adds=dense_muls, muls=dense_muls, mul_ratio=1.0,
                           wall_s="", correct="")
                yield row
                continue
            counter = CountingRing(base)
            out = _run(alg, A, B, t, counter, spec.seed)
            adds, muls = counter.adds, counter.muls
            times = []
            if warmup and repeats > 0:
                _run(alg, A, B, t, base, spec.seed)
            for _ in range(repeats):
                t0 = time.perf_counter()
                _run(alg, A, B, t, base, spec.seed)
                times.append(time.perf_counter() - t0)
            row.update(
                adds=adds, muls=muls, mul_ratio=muls / dense_muls if dense_muls else 0.0,
                wall_s=f"{statistics.median(times):.6f}" if times else "",
                correct=out == C,
            )
            yield row


def bench_csv(grid, algs=ALGS, repeats: int = 1, out=None) -> str:
    buf = out if out is not None else io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for row in bench_rows(grid, algs, repeats):
        w.writerow(row)
    return buf.getvalue() if out is None else ""


def default_grid(ns=(63, 255), rings=("Fp:101",), delta_in=1.0, delta_out=0.5, seeds=(0,), strategy="random-support"):
    return [InstanceSpec(n, r, delta_in, delta_out, s, strategy) for n in ns for r in rings for s in seeds]
