"""Column-major sparse vectors and matrices over an exact ring.

Indices are 0-based in memory; the file layer (:mod:`sparsemm.io`) converts
to and from the 1-based convention.  Every constructor path goes through
:meth:`SparseVec.from_dict` or validates explicitly, so stored zeros and
unsorted indices are never observable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .algebra import Ring

log = logging.getLogger(__name__)

# dense_mm refuses to allocate more than this many entries per operand.
DENSE_BUDGET = 1 << 26


# Test hook: when enabled, every sparse_mm and dense_mm result is audited for structure and
# for nnz(AB) <= t * nnz(B), t = max column nnz of A.
AUDIT = {"enabled": False, "products": 0, "violations": 0}


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class SparseVec:
    length: int
    idx: tuple = ()
    val: tuple = ()

    def __post_init__(self):
        if len(self.idx) != len(self.val):
            raise ShapeError("index/value length mismatch")

    @classmethod
    def from_dict(cls, length: int, entries: dict, ring: Ring | None = None) -> "SparseVec":
        """Build from ``{index: value}``, dropping zeros."""
        is_zero = ring.is_zero if ring is not None else (lambda v: v == 0)
        keys = sorted(k for k, v in entries.items() if not is_zero(v))
        return cls(length, tuple(keys), tuple(entries[k] for k in keys))

    @classmethod
    def from_pairs(cls, length: int, pairs, ring: Ring | None = None) -> "SparseVec":
        d = {}
        for i, v in pairs:
            if i in d:
                raise ValueError(f"duplicate index {i}")
            d[i] = v
        return cls.from_dict(length, d, ring)

    @classmethod
    def zeros(cls, length: int) -> "SparseVec":
        return cls(length)

    @property
    def nnz(self) -> int:
        return len(self.idx)

    def items(self):
        return zip(self.idx, self.val)

    def to_dict(self) -> dict:
        return dict(zip(self.idx, self.val))

    def get(self, i, default=0):
        # linear scan is fine for the short vectors this is used on
        for k, v in zip(self.idx, self.val):
            if k == i:
                return v
        return default

    def to_dense(self, zero=0) -> list:
        out = [zero] * self.length
        for i, v in zip(self.idx, self.val):
            out[i] = v
        return out

    def check(self, ring: Ring | None = None):
        prev = -1
        for i, v in zip(self.idx, self.val):
            if not (prev < i < self.length):
                raise AssertionError(f"index {i} out of order or range")
            if (ring.is_zero(v) if ring is not None else v == 0):
                raise AssertionError(f"stored zero at {i}")
            prev = i


def vec_add(ring: Ring, x: SparseVec, y: SparseVec) -> SparseVec:
    if x.length != y.length:
        raise ShapeError("length mismatch")
    acc = x.to_dict()
    add = ring.add
    for i, v in zip(y.idx, y.val):
        acc[i] = add(acc[i], v) if i in acc else v
    return SparseVec.from_dict(x.length, acc, ring)


def vec_sub(ring: Ring, x: SparseVec, y: SparseVec) -> SparseVec:
    if x.length != y.length:
        raise ShapeError("length mismatch")
    acc = x.to_dict()
    sub, neg = ring.sub, ring.neg
    for i, v in zip(y.idx, y.val):
        acc[i] = sub(acc[i], v) if i in acc else neg(v)
    return SparseVec.from_dict(x.length, acc, ring)


@dataclass(frozen=True)
class SparseMat:
    """``rows`` x ``cols`` matrix stored as one SparseVec per column.

    ``col_ids`` records original column positions after :func:`restrict_columns`.
    """

    ring: Ring
    rows: int
    cols: int
    columns: tuple
    col_ids: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.columns) != self.cols:
            raise ShapeError(f"expected {self.cols} columns, got {len(self.columns)}")
        for c in self.columns:
            if c.length != self.rows:
                raise ShapeError("column length does not match row count")

    @classmethod
    def zeros(cls, ring, rows, cols):
        return cls(ring, rows, cols, tuple(SparseVec(rows) for _ in range(cols)))

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, n, n, tuple(SparseVec(n, (j,), (ring.one,)) for j in range(n)))

    @classmethod
    def from_entries(cls, ring, rows, cols, entries) -> "SparseMat":
        """Build from ``(i, j, value)`` triples (0-based).  Duplicates are rejected."""
        percol = [dict() for _ in range(cols)]
        for i, j, v in entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ShapeError(f"entry ({i}, {j}) outside {rows}x{cols}")
            if i in percol[j]:
                raise ValueError(f"duplicate entry ({i}, {j})")
            percol[j][i] = v
        return cls(ring, rows, cols, tuple(SparseVec.from_dict(rows, d, ring) for d in percol))

    @classmethod
    def from_dense(cls, ring, dense) -> "SparseMat":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        return cls.from_entries(
            ring, rows, cols, ((i, j, ring.normalize(dense[i][j])) for i in range(rows) for j in range(cols))
        )

    @classmethod
    def from_columns(cls, ring, rows, columns, col_ids=None) -> "SparseMat":
        columns = tuple(columns)
        return cls(ring, rows, len(columns), columns, col_ids)

    @property
    def shape(self):
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return sum(c.nnz for c in self.columns)

    def entries(self):
        for j, c in enumerate(self.columns):
            for i, v in zip(c.idx, c.val):
                yield i, j, v

    def to_dense(self) -> list:
        out = [[self.ring.zero] * self.cols for _ in range(self.rows)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def get(self, i, j):
        return self.columns[j].get(i, self.ring.zero)

    def check(self):
        for c in self.columns:
            c.check(self.ring)

    def __eq__(self, other):
        if not isinstance(other, SparseMat):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.rows == other.rows
            and self.cols == other.cols
            and self.columns == other.columns
        )

    def __hash__(self):
        return hash((self.ring.tag, self.rows, self.cols, self.columns))


def _check_mm(A: SparseMat, B: SparseMat):
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    if A.ring != B.ring:
        raise ShapeError(f"ring mismatch {A.ring.tag} vs {B.ring.tag}")


def sparse_mm(A: SparseMat, B: SparseMat, ring: Ring | None = None) -> SparseMat:
    """Gustavson product: column j of AB is the sum of A[:, k] * B[k, j].

    ``ring`` overrides ``A.ring`` for the arithmetic (e.g. a CountingRing).
    """
    _check_mm(A, B)
    ring = ring or A.ring
    add, mul, is_zero = ring.add, ring.mul, ring.is_zero
    acols = A.columns
    out = []
    for bcol in B.columns:
        acc = {}
        for k, bv in zip(bcol.idx, bcol.val):
            a = acols[k]
            for i, av in zip(a.idx, a.val):
                p = mul(av, bv)
                if i in acc:
                    acc[i] = add(acc[i], p)
                else:
                    acc[i] = p
        keys = sorted(i for i, v in acc.items() if not is_zero(v))
        out.append(SparseVec(A.rows, tuple(keys), tuple(acc[i] for i in keys)))
    C = SparseMat(A.ring, A.rows, B.cols, tuple(out))
    if AUDIT["enabled"]:
        _audit(A, B, C)
    return C


def _audit(A, B, C):
    C.check()
    bound = max_col_nnz(A) * B.nnz
    AUDIT["products"] += 1
    if C.nnz > bound:
        AUDIT["violations"] += 1
        raise AssertionError(f"nnz(AB) = {C.nnz} exceeds t * nnz(B) = {bound}")


def dense_mm(A: SparseMat, B: SparseMat, ring: Ring | None = None, budget: int = DENSE_BUDGET) -> SparseMat:
    """Cubic product on densified operands.

    Performs exactly ``rows*inner*cols`` multiplications; falls back to
    :func:`sparse_mm` if either operand exceeds ``budget`` entries.
    """
    _check_mm(A, B)
    ring = ring or A.ring
    if A.rows * A.cols > budget or B.rows * B.cols > budget:
        log.info("dense_mm: %dx%d x %dx%d over budget, using sparse_mm", A.rows, A.cols, B.rows, B.cols)
        return sparse_mm(A, B, ring)
    add, mul, zero = ring.add, ring.mul, ring.zero
    Ad = A.to_dense()
    Bd = B.to_dense()
    m, n, p = A.rows, A.cols, B.cols
    out = []
    for j in range(p):
        bcol = [Bd[k][j] for k in range(n)]
        col = {}
        for i in range(m):
            row = Ad[i]
            s = zero
            for k in range(n):
                s = add(s, mul(row[k], bcol[k]))
            col[i] = s
        out.append(SparseVec.from_dict(m, col, ring))
    C = SparseMat(A.ring, m, p, tuple(out))
    if AUDIT["enabled"]:
        _audit(A, B, C)
    return C


def mat_add(A: SparseMat, B: SparseMat, ring: Ring | None = None) -> SparseMat:
    if A.shape != B.shape:
        raise ShapeError("shape mismatch")
    ring = ring or A.ring
    return SparseMat(A.ring, A.rows, A.cols, tuple(vec_add(ring, a, b) for a, b in zip(A.columns, B.columns)))


def mat_sub(A: SparseMat, B: SparseMat, ring: Ring | None = None) -> SparseMat:
    if A.shape != B.shape:
        raise ShapeError("shape mismatch")
    ring = ring or A.ring
    return SparseMat(A.ring, A.rows, A.cols, tuple(vec_sub(ring, a, b) for a, b in zip(A.columns, B.columns)))


def restrict_columns(B: SparseMat, J) -> SparseMat:
    """Columns of B at positions J (in J's order); ``col_ids`` maps back to B."""
    J = tuple(J)
    for j in J:
        if not 0 <= j < B.cols:
            raise IndexError(f"column {j} outside 0..{B.cols - 1}")
    base = B.col_ids if B.col_ids is not None else range(B.cols)
    return SparseMat(B.ring, B.rows, len(J), tuple(B.columns[j] for j in J), tuple(base[j] for j in J))


def transpose(A: SparseMat) -> SparseMat:
    rows = [([], []) for _ in range(A.rows)]
    for j, c in enumerate(A.columns):
        for i, v in zip(c.idx, c.val):
            r = rows[i]
            r[0].append(j)
            r[1].append(v)
    # columns are visited in increasing j, so each row list is already sorted
    return SparseMat(A.ring, A.cols, A.rows, tuple(SparseVec(A.cols, tuple(r[0]), tuple(r[1])) for r in rows))


def pad_to_square(A: SparseMat, B: SparseMat):
    """Zero-pad an m x n and an n x p matrix to n x n each."""
    m, n = A.shape
    if B.rows != n:
        raise ShapeError("inner dimensions differ")
    p = B.cols
    if m > n or p > n:
        raise ShapeError(f"cannot pad {m}x{n} and {n}x{p} to square: need m, p <= n")
    Ap = SparseMat.from_columns(A.ring, n, (SparseVec(n, c.idx, c.val) for c in A.columns))
    Bp = SparseMat.from_columns(B.ring, n, list(B.columns) + [SparseVec(n)] * (n - p))
    return Ap, Bp


def unpad(C: SparseMat, m: int, p: int) -> SparseMat:
    """Top-left m x p block."""
    cols = []
    for c in C.columns[:p]:
        k = 0
        while k < len(c.idx) and c.idx[k] < m:
            k += 1
        cols.append(SparseVec(m, c.idx[:k], c.val[:k]))
    return SparseMat(C.ring, m, p, tuple(cols))


def sparsity_stats(M: SparseMat):
    """(total nnz, max column nnz, per-column nnz list)."""
    counts = [c.nnz for c in M.columns]
    return sum(counts), max(counts, default=0), counts


def max_col_nnz(M: SparseMat) -> int:
    return max((c.nnz for c in M.columns), default=0)
