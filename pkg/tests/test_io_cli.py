import csv
import io as stdio

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsemm import io as mio
from sparsemm.algebra import BinaryField, Integers, PrimeField
from sparsemm.bench import FIELDS, bench_csv, bench_rows, default_grid
from sparsemm.cli import main
from sparsemm.expander import ExpanderParams, build_pv_expander, dump_graph
from sparsemm.instances import InfeasibleSpec, InstanceSpec, budget, gen_instance
from sparsemm.sketch import apply_measurement, build_measurement
from sparsemm.sparse import SparseMat, SparseVec, sparse_mm

from conftest import random_mat

# -- file format --------------------------------------------------------------


def test_round_trip_all_rings(ring, rng):
    for _ in range(10):
        M = random_mat(ring, rng, int(rng.integers(1, 10)), int(rng.integers(1, 10)))
        assert mio.loads(mio.dumps(M)) == M


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 6), st.integers(-10**30, 10**30)), max_size=20))
def test_round_trip_integers_hypothesis(entries):
    Z = Integers()
    uniq = {(i, j): v for i, j, v in entries if v}
    M = SparseMat.from_entries(Z, 6, 7, [(i, j, v) for (i, j), v in uniq.items()])
    assert mio.loads(mio.dumps(M)) == M


def test_format_details():
    F = BinaryField(8)
    M = SparseMat.from_entries(F, 2, 3, [(1, 2, 0xAB)])
    text = mio.dumps(M, note="x")
    assert text.splitlines() == ["ring=F2e:8:11b rows=2 cols=3 nnz=1 note=x", "2 3 ab"]
    M2, meta = mio.loads(text, with_meta=True)
    assert M2 == M and meta == {"note": "x"}
    assert mio.loads("# comment\nring=Z rows=1 cols=1 nnz=0\n") == SparseMat.zeros(Integers(), 1, 1)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "rows=2 cols=2 nnz=0",
        "ring=Z rows=2 cols=2 nnz=1",
        "ring=Z rows=2 cols=2 nnz=1\n1 1 0",
        "ring=Z rows=2 cols=2 nnz=2\n1 1 3\n1 1 4",
        "ring=Z rows=2 cols=2 nnz=1\n3 1 3",
        "ring=Z rows=2 cols=2 nnz=1\n1 1",
        "ring=Fp:7 rows=2 cols=2 nnz=1\n1 1 9",
        "ring=Q rows=2 cols=2 nnz=0",
    ],
)
def test_bad_files(text):
    with pytest.raises((mio.FormatError, ValueError)):
        mio.loads(text)


def test_vector_helpers():
    F = PrimeField(7)
    x = SparseVec(5, (1, 4), (3, 6))
    assert mio.mat_to_vec(mio.vec_to_mat(F, x)) == x
    with pytest.raises(mio.FormatError):
        mio.mat_to_vec(SparseMat.zeros(F, 2, 2))


# -- instances ----------------------------------------------------------------


def test_budget_function():
    assert budget(1023, 0.5) == 32
    assert budget(1024, 0.5) == 32
    assert budget(64, 1.5) == 512
    assert budget(10, 0) == 1
    assert budget(7, 2) == 49


@pytest.mark.parametrize("strategy", ["random-support", "rank-structured", "boundary"])
def test_gen_instance_respects_budgets(strategy):
    for seed in range(5):
        spec = InstanceSpec(31, "Fp:101", 1.2, 1.0, seed, strategy)
        A, B, C = gen_instance(spec)
        assert A.nnz <= spec.in_budget and B.nnz <= spec.in_budget
        assert C.nnz <= spec.out_budget
        assert C == sparse_mm(A, B)
        assert gen_instance(spec)[0] == A


def test_gen_instance_examples():
    _, _, C = gen_instance(InstanceSpec(31, "Z", 1.0, 0.0, 1))
    assert C.nnz <= 1
    A, B, C = gen_instance(InstanceSpec(15, "Z", 2.0, 2.0, 1))
    assert A.nnz == 225
    A, B, C = gen_instance(InstanceSpec(31, "F2e:8", 1.2, 1.0, 2, "boundary"))
    t = 5  # isqrt(31)
    assert sorted(c.nnz for c in C.columns if c.nnz) == [t] * t


@pytest.mark.parametrize(
    "spec",
    [
        InstanceSpec(10, "Z", 0.5, 1.5),
        InstanceSpec(10, "Z", 2.5, 1.0),
        InstanceSpec(0, "Z"),
        InstanceSpec(10, "Z", strategy="nope"),
        InstanceSpec(31, "Z", 1.0, 1.5, 0, "boundary"),
    ],
)
def test_infeasible_specs(spec):
    with pytest.raises(InfeasibleSpec):
        gen_instance(spec)


# -- bench --------------------------------------------------------------------


def test_bench_empty_grid_is_header_only():
    assert bench_csv([]) == ",".join(FIELDS) + "\n"


def test_bench_counts_reproducible():
    grid = default_grid(ns=(15,), seeds=(0,))
    rows1 = [(r["alg"], r["adds"], r["muls"]) for r in bench_rows(grid, repeats=1)]
    rows2 = [(r["alg"], r["adds"], r["muls"]) for r in bench_rows(grid, repeats=1)]
    assert rows1 == rows2
    text = bench_csv(grid, repeats=1)
    rows = list(csv.DictReader(stdio.StringIO(text)))
    assert {r["alg"] for r in rows} == {"naive", "dense", "det", "rand"}
    assert all(r["correct"] == "True" for r in rows)
    dense = next(r for r in rows if r["alg"] == "dense")
    assert int(dense["muls"]) == 15**3 and float(dense["mul_ratio"]) == 1.0


# -- CLI ----------------------------------------------------------------------


@pytest.fixture
def instance_files(tmp_path):
    prefix = str(tmp_path / "inst")
    assert main(["gen", "--n", "31", "--ring", "Fp:101", "--delta-out", "1", "--seed", "3", "-o", prefix]) == 0
    return {k: f"{prefix}_{k}.mtx" for k in "ABC"}


@pytest.mark.parametrize("alg", ["det", "rand", "naive"])
def test_cli_multiply(instance_files, tmp_path, alg):
    out = tmp_path / f"{alg}.mtx"
    args = ["multiply", "--alg", alg, "--a", instance_files["A"], "--b", instance_files["B"], "-o", str(out)]
    if alg == "det":
        args += ["--nnz-bound", "31"]
    assert main(args) == 0
    assert mio.load(out) == mio.load(instance_files["C"])


def test_cli_multiply_promise_violation(tmp_path):
    F = PrimeField(101)
    rng = np.random.default_rng(0)
    for name in "AB":
        mio.save(tmp_path / f"{name}.mtx", random_mat(F, rng, 15, 15, 0.6))
    args = ["multiply", "--alg", "det", "--t", "1", "--post-verify",
            "--a", str(tmp_path / "A.mtx"), "--b", str(tmp_path / "B.mtx"), "-o", str(tmp_path / "o.mtx")]
    assert main(args) == 1


def test_cli_input_errors(tmp_path, instance_files, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("ring=Z rows=2 cols=2 nnz=3\n1 1 1\n")
    assert main(["multiply", "--alg", "naive", "--a", str(bad), "--b", str(bad)]) == 2
    assert main(["multiply", "--alg", "naive", "--a", str(tmp_path / "missing"), "--b", str(bad)]) == 2
    assert main(["gen", "--n", "10", "--delta-in", "0.5", "--delta-out", "1.5", "-o", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_colmmv(instance_files, tmp_path, capsys):
    A, B, C = instance_files["A"], instance_files["B"], instance_files["C"]
    assert main(["verify", "colmmv", "--a", A, "--b", B, "--c", C]) == 0
    Cm = mio.load(C)
    cols = list(Cm.columns)
    cols[4] = SparseVec(31, (0,), (5,)) if cols[4].to_dict() != {0: 5} else SparseVec(31)
    bad = tmp_path / "bad_C.mtx"
    mio.save(bad, SparseMat(Cm.ring, 31, 31, tuple(cols)))
    capsys.readouterr()
    assert main(["verify", "colmmv", "--a", A, "--b", B, "--c", str(bad), "--seed", "4"]) == 1
    assert capsys.readouterr().out.split() == ["5"]


def test_cli_sketch_round_trip(tmp_path):
    Z = Integers()
    x = SparseVec(40, (3, 17, 39), (5, -2, 9))
    mio.save(tmp_path / "x.mtx", mio.vec_to_mat(Z, x))
    z_path, r_path = tmp_path / "z.mtx", tmp_path / "r.mtx"
    assert main(["sketch", "measure", "--x", str(tmp_path / "x.mtx"), "--t", "4", "-o", str(z_path)]) == 0
    Zm, meta = mio.load(z_path, with_meta=True)
    assert meta == {"n": "40", "t": "4", "mode": "rs"}
    assert mio.mat_to_vec(Zm) == apply_measurement(build_measurement(40, 4), x, Z)
    assert main(["sketch", "recover", "--z", str(z_path), "-o", str(r_path)]) == 0
    assert mio.mat_to_vec(mio.load(r_path)) == x


def test_cli_sketch_recover_failure(tmp_path):
    Z = Integers()
    x = SparseVec(15, tuple(range(15)), tuple(range(1, 16)))
    mio.save(tmp_path / "x.mtx", mio.vec_to_mat(Z, x))
    z_path = tmp_path / "z.mtx"
    assert main(["sketch", "measure", "--x", str(tmp_path / "x.mtx"), "--t", "1", "-o", str(z_path)]) == 0
    assert main(["sketch", "recover", "--z", str(z_path), "-o", str(tmp_path / "r.mtx")]) == 1
    no_meta = tmp_path / "nm.mtx"
    no_meta.write_text("ring=Z rows=4 cols=1 nnz=0\n")
    assert main(["sketch", "recover", "--z", str(no_meta)]) == 2


def test_cli_expander(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert main(["expander", "gen", "--N", "16", "--q", "8", "--poly-degree", "2", "-o", str(g)]) == 0
    assert g.read_text() == dump_graph(build_pv_expander(ExpanderParams.manual(16, 8, 2)))
    assert main(["expander", "verify", "--graph", str(g), "--K", "2"]) == 0
    full = tmp_path / "full.txt"
    full.write_text("left=3 right=2 d=2\n1 2\n1 2\n1 2\n")
    capsys.readouterr()
    assert main(["expander", "verify", "--graph", str(full), "--K", "2"]) == 1
    assert capsys.readouterr().out.strip() == "violated by S = 1 2"
    capsys.readouterr()
    assert main(["expander", "stats", "--graph", str(g)]) == 0
    out = capsys.readouterr().out
    assert "edges=128" in out and "left=16" in out
    r = tmp_path / "r.txt"
    assert main(["expander", "gen", "--N", "16", "--random", "--d", "4", "--M", "32", "--seed", "2", "-o", str(r)]) == 0
    assert main(["expander", "gen", "--N", "16", "--random", "-o", str(r)]) == 2
    assert main(["expander", "gen", "--N", "64", "--K", "4", "-o", str(tmp_path / "rs.txt")]) == 0
    assert main(["expander", "verify", "--graph", str(tmp_path / "rs.txt"), "--K", "4"]) == 0


def test_cli_bench(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--n", "15", "--algs", "naive", "det", "-o", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["alg"] for r in rows] == ["naive", "det"]
    assert main(["bench", "--n", "-o", str(out)]) == 0
    assert out.read_text() == ",".join(FIELDS) + "\n"


def test_cli_config_file(tmp_path, instance_files):
    conf = tmp_path / "c.conf"
    conf.write_text("# defaults\nalg = det\nnnz-bound = 31\n")
    out = tmp_path / "o.mtx"
    args = ["--config", str(conf), "multiply", "--a", instance_files["A"], "--b", instance_files["B"], "-o", str(out)]
    assert main(args) == 0
    assert mio.load(out) == mio.load(instance_files["C"])
    # an explicit flag beats the config value
    assert main(args + ["--alg", "naive"]) == 0
    conf.write_text("not a pair\n")
    assert main(args) == 2


def test_cli_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["multiply"])
    assert exc.value.code == 2
