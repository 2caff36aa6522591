"""Unbalanced bipartite expanders.

Left vertices are signal coordinates, right vertices are measurements.  The
deterministic construction evaluates polynomials over GF(q) (Parvaresh-Vardy
style); with ``m == 1`` it reduces to a Reed-Solomon evaluation graph, where
two distinct left vertices share at most ``n - 1`` neighbours.  That
collision bound is what :func:`rs_params` uses to pick small parameters with a
provable ``(K, eps)`` guarantee.

All vertex indices are 0-based here; dumps are 1-based.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import BinaryField, Poly, find_irreducible, poly_eval, poly_powmod

# verify_expansion gives up rather than enumerate more subsets than this.
VERIFY_BUDGET = 10**7

DEFAULT_EPS = Fraction(1, 12)


class BudgetExceeded(RuntimeError):
    pass


def _log2_ceil(x: int) -> int:
    return (x - 1).bit_length() if x > 1 else 0


@dataclass(frozen=True)
class ExpanderParams:
    """Parameters of the polynomial construction.

    ``n`` is the polynomial-degree bound (left vertices are polynomials of
    degree < n over GF(q)), ``m`` the number of powered copies, ``h`` the power
    base.  ``d = q`` and the right side is GF(q)^(m+1).
    """

    N: int
    q: int
    n: int
    m: int
    h: int
    K: int | None = None
    eps: Fraction | None = None
    alpha: Fraction | None = None
    k: float | None = None
    clamped: bool = False

    def __post_init__(self):
        if self.q < 2 or self.q & (self.q - 1):
            raise ValueError(f"q={self.q} is not a power of two >= 2")
        if self.n < 1 or self.m < 1 or self.h < 2:
            raise ValueError("need n >= 1, m >= 1, h >= 2")
        if self.q**self.n < self.N:
            raise ValueError(f"q^n = {self.q ** self.n} < N = {self.N}")

    @property
    def d(self) -> int:
        return self.q

    @property
    def bits(self) -> int:
        return self.q.bit_length() - 1

    @property
    def right_size(self) -> int:
        return self.q ** (self.m + 1)

    @classmethod
    def manual(cls, N, q, n, m=1, h=2):
        return cls(N=N, q=q, n=n, m=m, h=h)


def derive_params(N: int, K: int, eps=DEFAULT_EPS, alpha=1) -> ExpanderParams:
    """Parameters from the GUV formulas (log base 2), with K, h, q clamped to >= 2."""
    eps = Fraction(eps)
    alpha = Fraction(alpha)
    if not 1 <= K <= N:
        raise ValueError("need 1 <= K <= N")
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    if alpha <= 0:
        raise ValueError("need alpha > 0")
    clamped = False
    n = _log2_ceil(N)
    if n < 1:
        n, clamped = 1, True
    if K < 2:
        K, clamped = 2, True
    if K & (K - 1) == 0:
        k = K.bit_length() - 1
    else:
        k = math.log2(K)
    base = 2 * n * Fraction(k) / eps if isinstance(k, int) else 2 * n * k / float(eps)
    if isinstance(base, Fraction) and alpha.numerator == 1:
        x = base ** alpha.denominator
        h = math.ceil(x)
    else:
        h = math.ceil(float(base) ** (1 / float(alpha)))
    if h < 2:
        h, clamped = 2, True
    m = max(1, math.ceil(k / math.log2(h)))
    e = 1 + alpha
    if e.denominator == 1:
        q = 1 << ((h ** int(e)).bit_length() - 1)
    else:
        q = 1 << math.floor(float(e) * math.log2(h))
    if q < 2:
        q, clamped = 2, True
    return ExpanderParams(N=N, q=q, n=n, m=m, h=h, K=K, eps=eps, alpha=alpha, k=k, clamped=clamped)


def rs_params(N: int, K: int, eps=DEFAULT_EPS) -> ExpanderParams:
    """Smallest-degree ``m = 1`` parameters that provably give a (K, eps)-expander.

    With m = 1, |N(S)| >= q|S| - C(|S|, 2)(n - 1), so q >= (K - 1)(n - 1) / (2 eps)
    suffices.  Searches n = 1.. for the smallest q.
    """
    eps = Fraction(eps)
    if not 1 <= K <= N:
        raise ValueError("need 1 <= K <= N")
    best = None
    for n in range(1, max(_log2_ceil(N), 1) + 1):
        need = math.ceil(Fraction((K - 1) * (n - 1)) / (2 * eps))
        q = 2
        while q < need or q**n < N:
            q *= 2
        if best is None or q < best[0]:
            best = (q, n)
    q, n = best
    return ExpanderParams(N=N, q=q, n=n, m=1, h=2, K=K, eps=eps)


@dataclass(frozen=True)
class BipartiteGraph:
    """d-left-regular bipartite graph; ``adj[l]`` is the sorted neighbour tuple of left vertex l."""

    left: int
    right: int
    d: int
    adj: tuple

    def __post_init__(self):
        if len(self.adj) != self.left:
            raise ValueError("adjacency length does not match left size")
        for nb in self.adj:
            if len(nb) != self.d:
                raise ValueError("graph is not d-left-regular")

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.left} {self.right} {self.d}\n".encode())
        for nb in self.adj:
            h.update((" ".join(map(str, nb)) + "\n").encode())
        return h.hexdigest()

    @property
    def edges(self) -> int:
        return self.left * self.d

    def max_right(self) -> int:
        return max((nb[-1] for nb in self.adj if nb), default=-1)

    def neighbourhood(self, S) -> set:
        out = set()
        for s in S:
            out.update(self.adj[s])
        return out


def left_polynomial(field: BinaryField, ell: int, n: int) -> Poly:
    """Polynomial whose coefficients are the little-endian base-q digits of ell."""
    q = field.order
    coeffs = []
    for _ in range(n):
        ell, c = divmod(ell, q)
        coeffs.append(c)
    return Poly(field, coeffs)


def build_pv_expander(params: ExpanderParams) -> BipartiteGraph:
    q, n, m, h = params.q, params.n, params.m, params.h
    field = BinaryField(params.bits)
    modulus = find_irreducible(params.bits, n, field)
    points = range(q)
    adj = []
    for ell in range(params.N):
        t = left_polynomial(field, ell, n)
        powers = [t]
        for _ in range(m - 1):
            powers.append(poly_powmod(powers[-1], h, modulus))
        evals = [[poly_eval(ti, y) for y in points] for ti in powers]
        nb = []
        for y in points:
            v = y
            for row in evals:
                v = v * q + row[y]
            nb.append(v)
        # y is the most significant digit, so nb is already increasing
        adj.append(tuple(nb))
    return BipartiteGraph(params.N, params.right_size, q, tuple(adj))


def make_rng(seed: int) -> np.random.Generator:
    """Seeded counter-based generator (Philox) used for all package randomness."""
    return np.random.Generator(np.random.Philox(seed))


def build_random_expander(N: int, d: int, M: int, seed: int) -> BipartiteGraph:
    if d > M:
        raise ValueError(f"d={d} exceeds right size M={M}")
    rng = make_rng(seed)
    adj = tuple(tuple(sorted(int(v) for v in rng.choice(M, size=d, replace=False))) for _ in range(N))
    return BipartiteGraph(N, M, d, adj)


def subset_count(N: int, K: int) -> int:
    return sum(math.comb(N, s) for s in range(1, min(K, N) + 1))


def verify_expansion(G: BipartiteGraph, K: int, eps=DEFAULT_EPS, budget: int = VERIFY_BUDGET):
    """Exhaustively check |N(S)| >= (1 - eps) d |S| for all nonempty |S| <= K.

    Returns ``(True, None)`` or ``(False, S)``.  The search is depth-first and
    tests the one-vertex extensions of a set in increasing order before
    descending, so the witness is deterministic.
    """
    eps = Fraction(eps)
    total = subset_count(G.left, K)
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed the budget of {budget}")
    masks = []
    for nb in G.adj:
        mk = 0
        for r in nb:
            mk |= 1 << r
        masks.append(mk)
    # |N(S)| * den >= (den - num) * d * |S|
    num, den = eps.numerator, eps.denominator
    per_vertex = (den - num) * G.d
    N = G.left
    stack = [(-1, 0, ())]
    while stack:
        last, acc, S = stack.pop()
        if len(S) == K:
            continue
        children = []
        for v in range(last + 1, N):
            mk = acc | masks[v]
            S2 = S + (v,)
            if mk.bit_count() * den < per_vertex * len(S2):
                return False, S2
            children.append((v, mk, S2))
        # push in reverse so vertices are explored in increasing order
        stack.extend(reversed(children))
    return True, None


def dump_graph(G: BipartiteGraph) -> str:
    lines = [f"left={G.left} right={G.right} d={G.d}"]
    lines += [" ".join(str(r + 1) for r in nb) for nb in G.adj]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> BipartiteGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = dict(kv.split("=") for kv in lines[0].split())
    adj = tuple(tuple(int(x) - 1 for x in ln.split()) for ln in lines[1:])
    G = BipartiteGraph(int(header["left"]), int(header["right"]), int(header["d"]), adj)
    for nb in adj:
        if any(not 0 <= r < G.right for r in nb):
            raise ValueError("right index out of range")
    return G


def graph_stats(G: BipartiteGraph) -> dict:
    return {
        "left": G.left,
        "right": G.right,
        "d": G.d,
        "edges": G.edges,
        "max_right_index": G.max_right() + 1,
        "distinct_neighbours": all(len(set(nb)) == len(nb) for nb in G.adj),
        "sha256": G.digest(),
    }
