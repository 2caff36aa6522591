import numpy as np
import pytest

from sparsemm import sparse
from sparsemm.algebra import BinaryField, Integers, PrimeField
from sparsemm.sparse import SparseMat, SparseVec

RINGS = {
    "Z": Integers(),
    "F7": PrimeField(7),
    "F101": PrimeField(101),
    "F2^8": BinaryField(8),
}

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def audit_products():
    """Every sparse_mm product in the suite is checked against the nnz bound."""
    sparse.AUDIT["enabled"] = True
    yield sparse.AUDIT
    sparse.AUDIT["enabled"] = False


@pytest.fixture(params=list(RINGS), ids=list(RINGS))
def ring(request):
    return RINGS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_mat(ring, rng, rows, cols, density=0.3):
    entries = []
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                entries.append((i, j, ring.random(rng, nonzero=True)))
    return SparseMat.from_entries(ring, rows, cols, entries)


def random_sparse_vec(ring, rng, n, k):
    idx = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
    return SparseVec(n, tuple(idx), tuple(ring.random(rng, nonzero=True) for _ in idx))


def dense_product(ring, A, B):
    """Schoolbook product on nested lists; independent of sparse.py."""
    Ad, Bd = A.to_dense(), B.to_dense()
    out = []
    for i in range(A.rows):
        row = []
        for j in range(B.cols):
            s = ring.zero
            for k in range(A.cols):
                s = ring.add(s, ring.mul(Ad[i][k], Bd[k][j]))
            row.append(s)
        out.append(row)
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        products, violations = sparse.AUDIT["products"], sparse.AUDIT["violations"]
        status = "PASS" if products and not violations else "FAIL"
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        terminalreporter.write_line(
            f"[{status}] criterion 8 (whole session): {products} audited products, {violations} violations of nnz(AB) <= t*nnz(B)"
        )
