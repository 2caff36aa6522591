import numpy as np
import pytest

from sparsemm.algebra import CountingRing, Integers, PrimeField
from sparsemm.expander import ExpanderParams, build_pv_expander
from sparsemm.sketch import (
    adjacency_matrix,
    apply_measurement,
    apply_measurement_mat,
    bit_matrix,
    build_measurement,
    max_iterations,
    padded_length,
    recover,
    reduce,
    row_tensor,
    subtract_measurement,
)
from sparsemm.sparse import ShapeError, SparseMat, SparseVec, sparse_mm, vec_add

from conftest import RINGS, random_mat, random_sparse_vec
from sketch_fixtures import VERIFIED, verified_measurement

Z = Integers()


def dense_apply(H, x, ring):
    """Oracle: explicit H (Gustavson) times x as a one-column matrix."""
    Hm = H.to_sparse(ring)
    xm = SparseMat(ring, x.length, 1, (x,))
    return sparse_mm(Hm, xm).columns[0]


def random_x(ring, rng, n, k):
    return random_sparse_vec(ring, rng, n, k)


def test_bit_matrix_examples():
    B = bit_matrix(7)
    assert [B.get(k, 4) for k in range(3)] == [1, 0, 1]  # coordinate 5
    assert [B.get(k, 6) for k in range(3)] == [1, 1, 1]  # coordinate 7
    for j in range(7):
        code = sum(1 << (3 - 1 - k) for k in B.columns[j].idx)
        assert code == j + 1
    with pytest.raises(ValueError):
        bit_matrix(6)


def test_padded_length():
    assert [padded_length(n) for n in (1, 2, 3, 4, 7, 8, 63, 64)] == [1, 3, 3, 7, 7, 15, 63, 127]


def test_row_tensor_examples():
    I2 = SparseMat.identity(Z, 2)
    ones = SparseMat.from_dense(Z, [[1, 1]])
    assert row_tensor(I2, ones) == I2
    assert row_tensor(SparseMat.zeros(Z, 3, 2), ones).nnz == 0
    with pytest.raises(ShapeError):
        row_tensor(I2, SparseMat.zeros(Z, 1, 3))


def test_row_tensor_against_dense_definition():
    rng = np.random.default_rng(4)
    for _ in range(50):
        A = SparseMat.from_dense(Z, rng.integers(0, 2, size=(4, 6)).tolist())
        B = SparseMat.from_dense(Z, rng.integers(0, 2, size=(3, 6)).tolist())
        R = row_tensor(A, B)
        Ad, Bd = A.to_dense(), B.to_dense()
        expect = [[Ad[i][c] * Bd[j][c] for c in range(6)] for i in range(4) for j in range(3)]
        assert R.to_dense() == expect
        for c in range(6):
            assert R.columns[c].nnz == A.columns[c].nnz * B.columns[c].nnz


def test_implicit_h_is_adjacency_row_tensor_bits():
    H = verified_measurement(4)
    explicit = row_tensor(adjacency_matrix(H.graph), bit_matrix(H.n))
    assert H.to_sparse() == explicit
    assert all(v == 1 for _, _, v in explicit.entries())
    assert H.rows == H.m_blocks * H.ell
    assert H.max_column_nnz() <= H.d * H.ell


def test_apply_zero_and_single_support():
    H = verified_measurement(2)
    F = PrimeField(101)
    assert apply_measurement(H, SparseVec(H.n), F).nnz == 0
    j, v = 36, 17  # coordinate 37 = 0b100101
    z = apply_measurement(H, SparseVec(H.n, (j,), (v,)), F)
    bits = [k for k in range(H.ell) if (j + 1) >> (H.ell - 1 - k) & 1]
    expected = sorted(r * H.ell + k for r in H.graph.adj[j] for k in bits)
    assert list(z.idx) == expected and set(z.val) == {v}


def test_apply_matches_dense_oracle(ring):
    H = verified_measurement(2)
    rng = np.random.default_rng(8)
    for _ in range(25):
        x = random_x(ring, rng, H.n, int(rng.integers(0, 20)))
        assert apply_measurement(H, x, ring) == dense_apply(H, x, ring)


def test_apply_uses_no_multiplications():
    H = verified_measurement(2)
    R = CountingRing(PrimeField(101))
    x = random_x(R.base, np.random.default_rng(0), H.n, 30)
    apply_measurement(H, x, R)
    assert R.muls == 0 and R.adds > 0


def test_linearity(ring):
    H = verified_measurement(4)
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = random_x(ring, rng, H.n, 5)
        b = random_x(ring, rng, H.n, 5)
        lhs = apply_measurement(H, vec_add(ring, a, b), ring)
        rhs = vec_add(ring, apply_measurement(H, a, ring), apply_measurement(H, b, ring))
        assert lhs == rhs


def test_apply_length_mismatch():
    H = verified_measurement(2)
    with pytest.raises(ShapeError):
        apply_measurement(H, SparseVec(10), Z)


def test_apply_measurement_mat():
    H = verified_measurement(2)
    F = PrimeField(7)
    I = SparseMat.identity(F, H.n)
    assert apply_measurement_mat(H, I) == H.to_sparse(F)
    assert apply_measurement_mat(H, SparseMat.zeros(F, H.n, 4)).nnz == 0
    M = random_mat(F, np.random.default_rng(1), H.n, 8, 0.05)
    assert apply_measurement_mat(H, M) == sparse_mm(H.to_sparse(F), M)
    assert apply_measurement_mat(H, M).nnz <= M.nnz * H.d * H.ell


def test_reduce_single_support_and_zero():
    H = verified_measurement(2)
    x = SparseVec(H.n, (40,), (-9,))
    assert reduce(H, apply_measurement(H, x, Z)) == x
    assert reduce(H, SparseVec(H.rows)).nnz == 0


def _support_diff(x, y, ring):
    d = x.to_dict()
    for j, v in zip(y.idx, y.val):
        d[j] = ring.sub(d.get(j, ring.zero), v)
    return sum(1 for v in d.values() if not ring.is_zero(v))


@pytest.mark.parametrize("t", sorted(VERIFIED))
def test_reduce_halves_on_verified_graph(t):
    H = verified_measurement(t)
    rng = np.random.default_rng(100 + t)
    for _ in range(100):
        k = int(rng.integers(1, t + 1))
        x = random_x(Z, rng, H.n, k)
        y = reduce(H, apply_measurement(H, x, Z))
        assert _support_diff(x, y, Z) <= k // 2


@pytest.mark.parametrize("name", ["Z", "F2^8"])
@pytest.mark.parametrize("t", [1, 2, 4, 8])
def test_recover_exact(t, name):
    ring = RINGS[name]
    H = verified_measurement(t) if t in VERIFIED else build_measurement(31, t)
    rng = np.random.default_rng(t)
    for _ in range(100):
        x = random_x(ring, rng, H.n, t)
        res = recover(H, apply_measurement(H, x, ring), ring)
        assert res.ok and res.status == "ok"
        assert res.x == x
        assert res.reduce_calls <= max_iterations(t)


def test_recover_single_nonzero_in_one_step():
    H = verified_measurement(8)
    x = SparseVec(H.n, (3,), (5,))
    res = recover(H, apply_measurement(H, x, Z), Z)
    assert res.ok and res.x == x and res.reduce_calls == 1


def test_recover_zero():
    H = verified_measurement(4)
    res = recover(H, SparseVec(H.rows), Z)
    assert res.ok and res.x.nnz == 0 and res.reduce_calls == 0


def test_max_iterations():
    assert [max_iterations(t) for t in (1, 2, 3, 4, 5, 8, 9)] == [1, 2, 3, 3, 4, 4, 5]


def test_recover_reports_failure_on_dense_signal():
    H = build_measurement(31, 2)
    x = SparseVec(31, tuple(range(31)), tuple(range(1, 32)))
    res = recover(H, apply_measurement(H, x, Z), Z)
    assert not res.ok and res.status == "failed" and res.x.nnz == 0


def test_rs_mode_recovers_at_scale():
    H = build_measurement(1023, 8)
    assert build_measurement(1023, 8) is H
    rng = np.random.default_rng(3)
    F = PrimeField(101)
    for _ in range(50):
        x = random_x(F, rng, 1023, 8)
        assert recover(H, apply_measurement(H, x, F), F).x == x


def test_padding_transparency():
    H = build_measurement(40, 4)
    assert H.n == 63 and H.n_raw == 40
    rng = np.random.default_rng(6)
    for _ in range(50):
        x = random_x(Z, rng, 40, 4)
        res = recover(H, apply_measurement(H, x, Z), Z)
        assert res.ok and res.x == x and res.x.length == 40


def test_subtract_measurement():
    H = verified_measurement(4)
    F = PrimeField(7)
    rng = np.random.default_rng(5)
    y = random_x(F, rng, H.n, 3)
    z = apply_measurement(H, random_x(F, rng, H.n, 4), F)
    assert subtract_measurement(z, H, SparseVec(H.n), F) == z
    assert subtract_measurement(apply_measurement(H, y, F), H, y, F).nnz == 0
    diff = subtract_measurement(z, H, y, F)
    assert vec_add(F, diff, dense_apply(H, y, F)) == z
    with pytest.raises(ShapeError):
        subtract_measurement(SparseVec(3), H, y, F)


def test_build_measurement_modes():
    with pytest.raises(ValueError):
        build_measurement(10, 0)
    with pytest.raises(ValueError):
        build_measurement(10, 11)
    H = build_measurement(15, 15)
    assert H.t == 15
    G = build_pv_expander(ExpanderParams.manual(16, 8, 2))
    Hm = build_measurement(15, 2, mode="manual", graph=G, verify=True)
    assert Hm.graph is G and Hm.rows == 64 * 4
    with pytest.raises(ValueError):
        build_measurement(15, 8, mode="manual", graph=G, verify=True)
    Hr = build_measurement(15, 2, mode="random", d=8, M=256, seed=0)
    x = SparseVec(15, (2, 9), (4, -1))
    assert recover(Hr, apply_measurement(Hr, x, Z), Z).x == x
    Ht = build_measurement(3, 2, mode="theory")
    assert Ht.graph.d >= 2
    with pytest.raises(ValueError):
        build_measurement(15, 2, mode="bogus")
