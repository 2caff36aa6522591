"""Column-wise matrix multiplication verification (Freivalds with many rows).

Given A (m x n), B (n x p) and a claimed product C' (m x p), sample a uniform
0/1 matrix X with ``ceil((c+1) log2(mnp))`` rows and report the columns where
``(XA)B - XC'`` is nonzero.  A reported column always differs from AB; a
differing column is missed with probability at most 2^-rows.

The sampler is numpy's Philox counter-based generator keyed by ``seed``, so a
given (inputs, seed) pair always yields the same answer, and the dense and
sparse variants see the same X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .algebra import Ring
from .expander import make_rng
from .sparse import ShapeError, SparseMat, SparseVec, dense_mm, mat_sub, sparse_mm


@dataclass(frozen=True)
class VerifierConfig:
    c: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("confidence exponent c must be a positive integer")

    def n_rows(self, m: int, n: int, p: int) -> int:
        size = m * n * p
        if size <= 1:
            return 1
        if size & (size - 1) == 0:
            lg = size.bit_length() - 1
            return max(1, (self.c + 1) * lg)
        return max(1, math.ceil((self.c + 1) * math.log2(size)))


def sample_x(ring: Ring, rows: int, m: int, seed: int) -> SparseMat:
    """Uniform 0/1 matrix of shape rows x m with ring zero/one entries."""
    bits = make_rng(seed).integers(0, 2, size=(rows, m), dtype="uint8")
    cols = []
    for k in range(m):
        idx = tuple(int(i) for i in bits[:, k].nonzero()[0])
        cols.append(SparseVec(rows, idx, (ring.one,) * len(idx)))
    return SparseMat(ring, rows, m, tuple(cols))


def _check(A, B, Cp):
    if A.cols != B.rows or Cp.rows != A.rows or Cp.cols != B.cols:
        raise ShapeError(
            f"inconsistent shapes A {A.rows}x{A.cols}, B {B.rows}x{B.cols}, C' {Cp.rows}x{Cp.cols}"
        )


def _mmv(A, B, Cp, cfg, ring, mm):
    _check(A, B, Cp)
    ring = ring or A.ring
    X = sample_x(A.ring, cfg.n_rows(A.rows, A.cols, B.cols), A.rows, cfg.seed)
    D = mat_sub(mm(mm(X, A, ring), B, ring), mm(X, Cp, ring), ring)
    return [j for j, col in enumerate(D.columns) if col.idx]


def column_wise_mmv(A: SparseMat, B: SparseMat, Cp: SparseMat, cfg: VerifierConfig = VerifierConfig(), ring=None):
    """0-based indices of columns where AB and C' (probably) differ; dense products."""
    return _mmv(A, B, Cp, cfg, ring, dense_mm)


def column_wise_mmv_sparse(A, B, Cp, cfg: VerifierConfig = VerifierConfig(), ring=None):
    """Same answer as :func:`column_wise_mmv` for the same seed, via Gustavson products."""
    return _mmv(A, B, Cp, cfg, ring, sparse_mm)
