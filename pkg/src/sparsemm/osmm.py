"""Output-sparse matrix multiplication.

``osmm_deterministic`` is the two-pass sketch-and-recover algorithm: measure
every column of AB, recover the t-sparse ones, then measure the rows of the
remainder (each of which is t-sparse whenever nnz(AB) <= t^2) and recover
those.  ``osmm_randomized`` doubles the sparsity budget each round, recovers
the still-open columns and lets a column-wise Freivalds check decide which
ones to commit.  Its output is exact unless the verifier misses a wrong column,
whatever the sparsity of AB.

The fast rectangular products of the analysis are replaced by
:func:`strategy_dispatch`, which picks Gustavson or the dense cubic product.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import Ring
from .sketch import MeasurementMatrix, apply_measurement, build_measurement, recover
from .sparse import (
    ShapeError,
    SparseMat,
    SparseVec,
    dense_mm,
    mat_add,
    mat_sub,
    max_col_nnz,
    pad_to_square,
    restrict_columns,
    sparse_mm,
    transpose,
    unpad,
)
from .verify import VerifierConfig, column_wise_mmv_sparse

log = logging.getLogger(__name__)


class PromiseViolation(RuntimeError):
    """The output-sparsity promise behind the deterministic algorithm does not hold."""


@dataclass(frozen=True)
class OsmmConfig:
    t: int | None = None
    nnz_bound: int | None = None
    strategy: str = "auto"
    sketch_mode: str = "rs"
    alpha: int = 1
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    post_verify: bool = False

    def __post_init__(self):
        if self.t is not None and self.t < 1:
            raise ValueError("t must be >= 1")
        if self.strategy not in ("auto", "dense", "sparse"):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def budget(self) -> int | None:
        if self.t is not None:
            return self.t
        if self.nnz_bound is not None:
            b = self.nnz_bound
            return math.isqrt(b - 1) + 1 if b > 0 else 1
        return None


def strategy_dispatch(A: SparseMat, B: SparseMat, strategy: str = "auto"):
    """Pick the multiplier: Gustavson when t*nnz(B) + p <= m*n*p (ties go sparse).

    t is the largest column count of A; the ``+ p`` is one accumulator per
    output column, which sends fully dense inputs to the cubic product.
    """
    if strategy == "sparse":
        return sparse_mm
    if strategy == "dense":
        return dense_mm
    sparse_cost = max_col_nnz(A) * B.nnz + B.cols
    dense_cost = A.rows * A.cols * B.cols
    choice = sparse_mm if sparse_cost <= dense_cost else dense_mm
    log.debug("strategy: sparse cost %d vs dense cost %d -> %s", sparse_cost, dense_cost, choice.__name__)
    return choice


def multiply(A: SparseMat, B: SparseMat, ring: Ring | None = None, strategy: str = "auto") -> SparseMat:
    return strategy_dispatch(A, B, strategy)(A, B, ring)


def measured_product(H: MeasurementMatrix, A: SparseMat, B: SparseMat, ring: Ring, strategy="auto") -> SparseMat:
    """(HA)B.  Only the columns of HA that meet a nonzero row of B are formed."""
    needed = set()
    for c in B.columns:
        needed.update(c.idx)
    empty = SparseVec(H.rows)
    HA = SparseMat(
        A.ring,
        H.rows,
        A.cols,
        tuple(apply_measurement(H, A.columns[k], ring) if k in needed else empty for k in range(A.cols)),
    )
    D = multiply(HA, B, ring, strategy)
    return SparseMat(D.ring, D.rows, D.cols, D.columns, B.col_ids)


def _recover_columns(H, D, ring):
    cols, failed = [], []
    for j, col in enumerate(D.columns):
        res = recover(H, col, ring)
        cols.append(res.x)
        if not res.ok:
            failed.append(j)
    return SparseMat(D.ring, H.n_raw, D.cols, tuple(cols), D.col_ids), failed


def _square(A, B):
    if A.rows != A.cols or B.shape != A.shape:
        raise ShapeError(f"expected two n x n matrices, got {A.shape} and {B.shape}")
    if A.ring != B.ring:
        raise ShapeError("ring mismatch")


def osmm_deterministic(A: SparseMat, B: SparseMat, cfg: OsmmConfig = OsmmConfig(), ring: Ring | None = None, trace=None):
    """AB for n x n inputs under the promise nnz(AB) <= t^2.

    ``trace``, if a dict, receives the pass-1 matrix and recovery failures.
    """
    _square(A, B)
    ring = ring or A.ring
    n = A.rows
    t = cfg.budget()
    if t is None:
        if cfg.post_verify:
            log.info("no sparsity budget given; falling back to the randomized algorithm")
            return osmm_randomized(A, B, cfg, ring)
        raise ValueError("deterministic OSMM needs t or nnz_bound (or post_verify to fall back)")
    if n == 0:
        return SparseMat.zeros(A.ring, 0, 0)
    H = build_measurement(n, min(t, n), cfg.alpha, cfg.sketch_mode)

    D = measured_product(H, A, B, ring, cfg.strategy)
    D1, failed1 = _recover_columns(H, D, ring)

    # F = H (AB - D1)^T, as (H B^T) A^T - H D1^T
    F = mat_sub(measured_product(H, transpose(B), transpose(A), ring, cfg.strategy),
                _measure_all(H, transpose(D1), ring), ring)
    F1, failed2 = _recover_columns(H, F, ring)
    if trace is not None:
        trace.update(t=t, H=H, pass1=D1, pass1_failed=failed1, pass2_failed=failed2)
    if failed2:
        raise PromiseViolation(f"row recovery failed for rows {failed2[:10]}: nnz(AB) exceeds t^2 = {t * t}")
    C = mat_add(D1, transpose(F1), ring)
    if cfg.post_verify:
        bad = column_wise_mmv_sparse(A, B, C, cfg.verifier, ring)
        if bad:
            raise PromiseViolation(f"post-verification found differing columns {bad[:10]}")
    return C


def _measure_all(H, M, ring):
    return SparseMat(M.ring, H.rows, M.cols, tuple(apply_measurement(H, c, ring) for c in M.columns))


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0])


def osmm_randomized(A: SparseMat, B: SparseMat, cfg: OsmmConfig = OsmmConfig(), ring: Ring | None = None, trace=None):
    """AB for n x n inputs via doubling sparsity budgets and column-wise verification.

    ``trace``, if a list, receives one dict per round with the open column set
    before and after the round.
    """
    _square(A, B)
    ring = ring or A.ring
    n = A.rows
    open_cols = list(range(n))
    out = [SparseVec(n)] * n
    rounds = (n - 1).bit_length() if n > 1 else 0
    for i in range(rounds + 1):
        if not open_cols:
            break
        t = min(1 << i, n)
        H = build_measurement(n, t, cfg.alpha, cfg.sketch_mode)
        Bj = restrict_columns(B, open_cols)
        D = measured_product(H, A, Bj, ring, cfg.strategy)
        F, _ = _recover_columns(H, D, ring)
        vcfg = VerifierConfig(cfg.verifier.c, derive_seed(cfg.verifier.seed, i))
        wrong = column_wise_mmv_sparse(A, Bj, F, vcfg, ring)
        wrong_set = set(wrong)
        for k, j in enumerate(open_cols):
            if k not in wrong_set:
                out[j] = F.columns[k]
        still_open = [open_cols[k] for k in wrong]
        if trace is not None:
            trace.append({"round": i, "t": t, "open": list(open_cols), "next": list(still_open)})
        open_cols = still_open
    if open_cols:
        # unreachable: the final round has t >= n, so recovery is exact
        raise AssertionError(f"columns {open_cols} never verified")
    return SparseMat(A.ring, n, n, tuple(out))


def rect_multiply(A: SparseMat, B: SparseMat, cfg: OsmmConfig = OsmmConfig(), ring: Ring | None = None):
    """m x n times n x p (m, p <= n) by zero-padding to square and running the randomized algorithm."""
    m, p = A.rows, B.cols
    Ap, Bp = pad_to_square(A, B)
    return unpad(osmm_randomized(Ap, Bp, cfg, ring), m, p)
