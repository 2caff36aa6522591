"""Seeded generation of sparse instances with a planted product sparsity.

An instance with parameters (n, delta_in, delta_out) has nnz(A), nnz(B) <=
ceil(n^delta_in) and nnz(AB) <= ceil(n^delta_out).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import Ring, ring_from_tag
from .expander import make_rng
from .sparse import SparseMat, SparseVec, sparse_mm

STRATEGIES = ("random-support", "rank-structured", "boundary")


class InfeasibleSpec(ValueError):
    pass


def budget(n: int, delta) -> int:
    """ceil(n^delta), exact for integer powers and robust to float noise elsewhere."""
    if n <= 1:
        return 1
    delta = Fraction(delta).limit_denominator(64)
    num, den = delta.numerator, delta.denominator
    b = max(1, math.ceil(n ** (num / den)) - 1)
    # smallest b with b^den >= n^num
    while b**den < n**num:
        b += 1
    return b


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    ring: str = "Fp:101"
    delta_in: float = 1.0
    delta_out: float = 1.0
    seed: int = 0
    strategy: str = "random-support"

    def validate(self):
        if self.n < 1:
            raise InfeasibleSpec("n must be >= 1")
        for name in ("delta_in", "delta_out"):
            v = getattr(self, name)
            if not 0 <= v <= 2:
                raise InfeasibleSpec(f"{name}={v} outside [0, 2]")
        if self.delta_out > 2 * self.delta_in:
            raise InfeasibleSpec(f"delta_out={self.delta_out} > 2*delta_in={2 * self.delta_in}")
        if self.strategy not in STRATEGIES:
            raise InfeasibleSpec(f"unknown strategy {self.strategy!r}")

    @property
    def in_budget(self) -> int:
        return min(budget(self.n, self.delta_in), self.n * self.n)

    @property
    def out_budget(self) -> int:
        return min(budget(self.n, self.delta_out), self.n * self.n)


def _positions(rng, n, k):
    flat = rng.choice(n * n, size=min(k, n * n), replace=False)
    return [(int(f) // n, int(f) % n) for f in flat]


def _random_matrix(ring, rng, n, k):
    return SparseMat.from_entries(ring, n, n, [(i, j, ring.random(rng, nonzero=True)) for i, j in _positions(rng, n, k)])


def _random_support(ring, rng, spec):
    n = spec.n
    A = _random_matrix(ring, rng, n, spec.in_budget)
    B = _random_matrix(ring, rng, n, spec.in_budget)
    C = sparse_mm(A, B)
    bcols = [c.to_dict() for c in B.columns]
    ccounts = [c.nnz for c in C.columns]
    total = sum(ccounts)
    # thin B column by column until the product fits
    while total > spec.out_budget:
        heavy = [j for j, c in enumerate(ccounts) if c]
        j = heavy[int(rng.integers(len(heavy)))]
        keys = sorted(bcols[j])
        del bcols[j][keys[int(rng.integers(len(keys)))]]
        col = sparse_mm(A, SparseMat(ring, n, 1, (SparseVec.from_dict(n, bcols[j], ring),))).columns[0]
        total += col.nnz - ccounts[j]
        ccounts[j] = col.nnz
    B = SparseMat(ring, n, n, tuple(SparseVec.from_dict(n, d, ring) for d in bcols))
    return A, B


def _rank_structured(ring, rng, spec):
    n, ib, ob = spec.n, spec.in_budget, spec.out_budget
    a = max(1, min(n, ib, math.isqrt(ob)))
    b = max(1, min(n, ib, ob // a))
    r = max(1, min(n, ib // a, ib // b, ob // (a * b)))
    inner = [int(k) for k in rng.choice(n, size=r, replace=False)]
    ea, eb = [], []
    for k in inner:
        for i in rng.choice(n, size=a, replace=False):
            ea.append((int(i), k, ring.random(rng, nonzero=True)))
        for j in rng.choice(n, size=b, replace=False):
            eb.append((k, int(j), ring.random(rng, nonzero=True)))
    return SparseMat.from_entries(ring, n, n, ea), SparseMat.from_entries(ring, n, n, eb)


def _boundary(ring, rng, spec):
    """t output columns, each a copy of a distinct A column with exactly t nonzeros."""
    n = spec.n
    t = min(n, math.isqrt(spec.out_budget))
    if t * t > spec.in_budget:
        raise InfeasibleSpec(f"boundary instance needs nnz(A) = {t * t} > input budget {spec.in_budget}")
    inner = [int(k) for k in rng.choice(n, size=t, replace=False)]
    outs = [int(j) for j in rng.choice(n, size=t, replace=False)]
    ea, eb = [], []
    for k, j in zip(inner, outs):
        for i in rng.choice(n, size=t, replace=False):
            ea.append((int(i), k, ring.random(rng, nonzero=True)))
        eb.append((k, j, ring.one))
    return SparseMat.from_entries(ring, n, n, ea), SparseMat.from_entries(ring, n, n, eb)


_PLANTERS = {
    "random-support": _random_support,
    "rank-structured": _rank_structured,
    "boundary": _boundary,
}


def gen_instance(spec: InstanceSpec, ring: Ring | None = None):
    """Return (A, B, C) with C = AB computed by Gustavson; budgets are asserted."""
    spec.validate()
    ring = ring or ring_from_tag(spec.ring)
    rng = make_rng(spec.seed)
    A, B = _PLANTERS[spec.strategy](ring, rng, spec)
    C = sparse_mm(A, B)
    if A.nnz > spec.in_budget or B.nnz > spec.in_budget or C.nnz > spec.out_budget:
        raise AssertionError(
            f"generated instance breaks its budgets: {A.nnz}, {B.nnz} vs {spec.in_budget}; {C.nnz} vs {spec.out_budget}"
        )
    return A, B, C


def t_for(C: SparseMat) -> int:
    """Smallest t with nnz(C) <= t^2."""
    k = C.nnz
    return math.isqrt(k - 1) + 1 if k > 0 else 1
