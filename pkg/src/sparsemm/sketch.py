"""Expander-based compressed sensing over an arbitrary exact ring.

The measurement matrix is ``H = A (x)_r B``: A is the 0/1 adjacency matrix of
an unbalanced expander (right vertices x coordinates) and column j of B is the
binary expansion of the 1-based coordinate j+1, most significant bit first.
H is binary, so measuring only ever adds.  Row ``r*ell + k`` of H belongs to
expander vertex r and bit row k.

H is never stored densely: :class:`MeasurementMatrix` keeps, per coordinate,
the sorted list of H rows where that column is one.  A measurement is a plain
:class:`~sparsemm.sparse.SparseVec` of length ``m' * ell``; :func:`blocks`
splits it into per-vertex segments.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

from .algebra import Integers, Ring
from .expander import (
    DEFAULT_EPS,
    BipartiteGraph,
    ExpanderParams,
    build_pv_expander,
    build_random_expander,
    derive_params,
    rs_params,
    verify_expansion,
)
from .sparse import ShapeError, SparseMat, SparseVec, vec_sub

log = logging.getLogger(__name__)

Measurement = SparseVec

MODES = ("rs", "theory", "manual", "random")


def padded_length(n_raw: int) -> int:
    """Smallest n >= n_raw of the form 2^ell - 1."""
    return (1 << n_raw.bit_length()) - 1 if n_raw & (n_raw + 1) else n_raw


def bit_matrix(n: int, ring: Ring | None = None) -> SparseMat:
    """ell x n matrix whose column j (0-based) is the binary expansion of j+1, MSB in row 0."""
    if n < 1 or n & (n + 1):
        raise ValueError(f"n+1 = {n + 1} is not a power of two")
    ring = ring or Integers()
    ell = n.bit_length()
    cols = []
    for j in range(n):
        code = j + 1
        rows = tuple(k for k in range(ell) if code >> (ell - 1 - k) & 1)
        cols.append(SparseVec(ell, rows, (ring.one,) * len(rows)))
    return SparseMat(ring, ell, n, tuple(cols))


def row_tensor(A: SparseMat, B: SparseMat, ring: Ring | None = None) -> SparseMat:
    """Row tensor Hadamard product: row i*m2 + j is A[i] * B[j] coordinatewise."""
    if A.cols != B.cols:
        raise ShapeError("row_tensor needs equal column counts")
    ring = ring or A.ring
    mul, is_zero = ring.mul, ring.is_zero
    m2 = B.rows
    cols = []
    for a, b in zip(A.columns, B.columns):
        idx, val = [], []
        for i, av in zip(a.idx, a.val):
            for j, bv in zip(b.idx, b.val):
                p = mul(av, bv)
                if not is_zero(p):
                    idx.append(i * m2 + j)
                    val.append(p)
        cols.append(SparseVec(A.rows * m2, tuple(idx), tuple(val)))
    return SparseMat(A.ring, A.rows * m2, A.cols, tuple(cols))


def adjacency_matrix(G: BipartiteGraph, ring: Ring | None = None) -> SparseMat:
    ring = ring or Integers()
    cols = tuple(SparseVec(G.right, tuple(nb), (ring.one,) * len(nb)) for nb in G.adj)
    return SparseMat(ring, G.right, G.left, cols)


@dataclass(frozen=True)
class MeasurementMatrix:
    """Implicit H for signals of length ``n_raw`` (padded to ``n = 2^ell - 1``)."""

    n_raw: int
    n: int
    t: int
    graph: BipartiteGraph
    mode: str = "rs"

    @property
    def ell(self) -> int:
        return self.n.bit_length()

    @property
    def d(self) -> int:
        return self.graph.d

    @property
    def m_blocks(self) -> int:
        return self.graph.right

    @property
    def rows(self) -> int:
        return self.graph.right * self.ell

    @cached_property
    def supports(self) -> tuple:
        """For each coordinate, the sorted H rows where its column is one."""
        ell = self.ell
        out = []
        for j in range(self.n):
            code = j + 1
            bits = [k for k in range(ell) if code >> (ell - 1 - k) & 1]
            out.append(tuple(r * ell + k for r in self.graph.adj[j] for k in bits))
        return tuple(out)

    def max_column_nnz(self) -> int:
        return max(len(s) for s in self.supports)

    def to_sparse(self, ring: Ring | None = None) -> SparseMat:
        """Explicit H, for test oracles only."""
        if self.n > 1 << 10:
            raise ValueError("explicit H is only built for n <= 1024")
        ring = ring or Integers()
        cols = tuple(SparseVec(self.rows, s, (ring.one,) * len(s)) for s in self.supports)
        return SparseMat(ring, self.rows, self.n, cols)


_cache: dict = {}


def build_measurement(
    n_raw: int,
    t: int,
    alpha=1,
    mode: str = "rs",
    *,
    params: ExpanderParams | None = None,
    graph: BipartiteGraph | None = None,
    d: int | None = None,
    M: int | None = None,
    seed: int = 0,
    attempts: int = 20,
    eps=DEFAULT_EPS,
    verify: bool = False,
) -> MeasurementMatrix:
    """Measurement matrix for t-sparse signals of length n_raw.

    Modes:
      ``rs``      smallest m=1 polynomial expander with a provable (t, eps) bound (default)
      ``theory``  parameters straight from the GUV formulas; huge at desk scale
      ``manual``  caller-supplied ``params`` or ready-made ``graph``
      ``random``  seeded random d-left-regular graph with M right vertices,
                  accepted only once exhaustive verification passes
    """
    if not 1 <= t <= n_raw:
        raise ValueError(f"need 1 <= t <= n, got t={t}, n={n_raw}")
    n = padded_length(n_raw)
    if mode == "rs":
        key = (n_raw, t, Fraction(eps))
        if key not in _cache:
            _cache[key] = MeasurementMatrix(n_raw, n, t, build_pv_expander(rs_params(n, t, eps)), "rs")
        return _cache[key]
    if mode == "theory":
        G = build_pv_expander(derive_params(n, t, eps, alpha))
    elif mode == "manual":
        if graph is None:
            if params is None:
                raise ValueError("manual mode needs params or graph")
            graph = build_pv_expander(params)
        G = graph
        if G.left < n:
            raise ValueError(f"graph has {G.left} left vertices, need {n}")
        if verify:
            ok, witness = verify_expansion(G, t, eps)
            if not ok:
                raise ValueError(f"graph is not a ({t}, {eps}) expander: witness {witness}")
    elif mode == "random":
        if d is None or M is None:
            raise ValueError("random mode needs d and M")
        for s in range(seed, seed + attempts):
            G = build_random_expander(n, d, M, s)
            ok, _ = verify_expansion(G, t, eps)
            if ok:
                log.info("random expander accepted at seed %d", s)
                break
        else:
            raise ValueError(f"no verified random expander in seeds {seed}..{seed + attempts - 1}")
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return MeasurementMatrix(n_raw, n, t, G, mode)


def _check_len(H: MeasurementMatrix, x: SparseVec):
    if x.length not in (H.n_raw, H.n):
        raise ShapeError(f"vector length {x.length} does not match n={H.n_raw}")


def apply_measurement(H: MeasurementMatrix, x: SparseVec, ring: Ring) -> Measurement:
    """Hx using additions only: each nonzero x_j is added into every H row of column j."""
    _check_len(H, x)
    add, is_zero = ring.add, ring.is_zero
    sup = H.supports
    acc = {}
    for j, v in zip(x.idx, x.val):
        for r in sup[j]:
            if r in acc:
                acc[r] = add(acc[r], v)
            else:
                acc[r] = v
    keys = sorted(r for r, v in acc.items() if not is_zero(v))
    return SparseVec(H.rows, tuple(keys), tuple(acc[r] for r in keys))


def apply_measurement_mat(H: MeasurementMatrix, M: SparseMat, ring: Ring | None = None) -> SparseMat:
    if M.rows not in (H.n_raw, H.n):
        raise ShapeError(f"matrix has {M.rows} rows, H expects {H.n_raw}")
    ring = ring or M.ring
    cols = tuple(apply_measurement(H, c, ring) for c in M.columns)
    return SparseMat(M.ring, H.rows, M.cols, cols, M.col_ids)


def blocks(H: MeasurementMatrix, z: Measurement) -> dict:
    """``{vertex: {bit row: value}}`` for the nonzero segments of z."""
    ell = H.ell
    out: dict = {}
    for r, v in zip(z.idx, z.val):
        b, k = divmod(r, ell)
        out.setdefault(b, {})[k] = v
    return out


def reduce(H: MeasurementMatrix, z: Measurement) -> SparseVec:
    """One halving step: decode isolating segments and keep majority candidates.

    A segment whose nonzero entries all equal v proposes coordinate
    j = sum of 2^(ell-k) over its set rows k (1-based), with value v.  A
    proposal is accepted when it occurs in more than d/2 segments.
    """
    if z.length != H.rows:
        raise ShapeError(f"measurement length {z.length} != {H.rows}")
    ell, n = H.ell, H.n
    candidates = Counter()
    for seg in blocks(H, z).values():
        vals = iter(seg.values())
        v = next(vals)
        if all(w == v for w in vals):
            j = 0
            for k in seg:
                j |= 1 << (ell - 1 - k)
            if 1 <= j <= n:
                candidates[(j - 1, v)] += 1
    half = H.d
    y = {}
    best = {}
    for (j, v), c in candidates.items():
        if 2 * c > half and (j not in best or c > best[j] or (c == best[j] and v < y[j])):
            best[j] = c
            y[j] = v
    keys = sorted(y)
    return SparseVec(n, tuple(keys), tuple(y[j] for j in keys))


def subtract_measurement(z: Measurement, H: MeasurementMatrix, y: SparseVec, ring: Ring) -> Measurement:
    """z - Hy."""
    if z.length != H.rows:
        raise ShapeError("measurement length mismatch")
    return vec_sub(ring, z, apply_measurement(H, y, ring))


class Recovery(NamedTuple):
    x: SparseVec
    ok: bool
    reduce_calls: int

    @property
    def status(self) -> str:
        return "ok" if self.ok else "failed"


def max_iterations(t: int) -> int:
    """ceil(log2(2t))."""
    return (2 * t - 1).bit_length()


def recover(H: MeasurementMatrix, z0: Measurement, ring: Ring) -> Recovery:
    """Iterate :func:`reduce` at most ceil(log 2t) times and sum the pieces.

    Fails (returning zero) when a step proposes more than 3t/2 entries, when a
    decoded entry lands in the padding, or when the final residual is nonzero.
    """
    failed = Recovery(SparseVec(H.n_raw), False, 0)
    z = z0
    total: dict = {}
    add = ring.add
    calls = 0
    for _ in range(max_iterations(H.t)):
        if not z.idx:
            break
        y = reduce(H, z)
        calls += 1
        if 2 * y.nnz > 3 * H.t:
            return failed._replace(reduce_calls=calls)
        z = subtract_measurement(z, H, y, ring)
        for j, v in zip(y.idx, y.val):
            total[j] = add(total[j], v) if j in total else v
    if z.idx:
        return failed._replace(reduce_calls=calls)
    x = SparseVec.from_dict(H.n, total, ring)
    if x.idx and x.idx[-1] >= H.n_raw:
        return failed._replace(reduce_calls=calls)
    return Recovery(SparseVec(H.n_raw, x.idx, x.val), True, calls)
