import itertools
import math

import numpy as np
import pytest

from ctxbench import gf2, hlf
from ctxbench.grid import GridGraph
from ctxbench.noise import NoiseParams


def five_sigma(p, n):
    return 5 * np.sqrt(p * (1 - p) / n)


def instance(rows, cols, p, seed):
    return hlf.random_instance(GridGraph.rect(rows, cols), p, np.random.default_rng(seed), seed)


def all_vectors(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), np.uint8)


# generation and algebra --------------------------------------------------

def test_random_instance_extremes_and_support():
    g = GridGraph.rect(3, 3)
    rng = np.random.default_rng(0)
    assert not hlf.random_instance(g, 0.0, rng).A.any()
    full = hlf.random_instance(g, 1.0, rng)
    assert full.n_s_gates == 9 and full.n_cz_gates == 12
    with pytest.raises(ValueError):
        hlf.random_instance(g, 1.5, rng)
    bad = np.zeros((9, 9), np.uint8)
    bad[0, 8] = bad[8, 0] = 1
    with pytest.raises(ValueError):
        hlf.HlfInstance(g, bad, 0.5)
    asym = np.zeros((9, 9), np.uint8)
    asym[0, 1] = 1
    with pytest.raises(ValueError):
        hlf.HlfInstance(g, asym, 0.5)


def test_random_instance_density():
    g = GridGraph.rect(3, 3)
    rng = np.random.default_rng(1)
    n = 10_000
    counts = [hlf.random_instance(g, 0.5, rng) for _ in range(n)]
    nz = np.array([i.n_s_gates + i.n_cz_gates for i in counts])
    # 21 independent fair bits: mean 10.5, sd sqrt(21)/2
    assert abs(nz.mean() - 10.5) <= 5 * math.sqrt(21 / 4 / n)


def test_quadratic_form_examples():
    assert hlf.quadratic_form([[1, 0], [0, 1]], [0, 0]) == 0
    assert hlf.quadratic_form([[1]], [1]) == 1
    assert hlf.quadratic_form([[1, 1], [1, 1]], [1, 1]) == 0
    assert hlf.quadratic_form([[0, 1], [1, 0]], [1, 1]) == 2
    with pytest.raises(ValueError):
        hlf.quadratic_form(np.eye(2), [1, 0, 1])


def test_null_space_examples():
    b = hlf.null_space_basis(np.zeros((3, 3)))
    assert len(b) == 3 and b.rank == 0
    assert gf2.rank(b.vectors) == 3
    b = hlf.null_space_basis(np.eye(3))
    assert len(b) == 0 and b.rank == 3
    with pytest.raises(ValueError):
        hlf.null_space_basis(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hlf.null_space_basis([[0, 1], [0, 0]])


@pytest.mark.parametrize("seed", range(10))
def test_kernel_matches_exhaustive_scan(seed):
    inst = instance(3, 3, 0.5, seed)
    X = all_vectors(9)
    in_kernel = X[(gf2.matmul(X, inst.A) == 0).all(axis=1)]
    b = inst.basis
    assert len(b) == 9 - b.rank
    if len(b):
        assert gf2.rank(b.vectors) == len(b)
    assert not gf2.matmul(b.vectors, inst.A).any()
    assert len(in_kernel) == 2 ** len(b)
    span = {tuple(v) for v in gf2.span(b.vectors)}
    assert span == {tuple(v) for v in in_kernel}


def test_q_is_linear_on_kernel():
    rng = np.random.default_rng(2)
    shapes = [(3, 3), (4, 4), (2, 5), (3, 4), (4, 2)]
    for t in range(1000):
        r, c = shapes[t % len(shapes)]
        inst = hlf.random_instance(GridGraph.rect(r, c), float(rng.choice([0.25, 0.5, 0.75])), rng)
        K = gf2.span(inst.basis.vectors)
        q = np.atleast_1d(hlf.quadratic_form(inst.A, K))
        s = (K[:, None, :] ^ K[None, :, :]).reshape(-1, inst.n)
        qs = np.atleast_1d(hlf.quadratic_form(inst.A, s)).reshape(len(K), len(K))
        assert ((q[:, None] + q[None, :]) % 4 == qs).all()
        assert (q % 2 == 0).all()


# circuit, solve and verify -----------------------------------------------

def test_circuit_layout():
    inst = instance(11, 11, 1.0, 3)
    c = hlf.build_hlf_circuit(inst)
    cz_moments = {op.moment for op in c.ops if op.kind == "CZ"}
    assert cz_moments == {2, 3, 4, 5}
    assert c.two_qubit_depth == 4
    assert c.depth == 8
    assert c.count("S") == inst.n_s_gates and c.count("CZ") == inst.n_cz_gates


def test_zeros_matrix_circuit_and_verification():
    g = GridGraph.rect(1, 3)
    inst = hlf.HlfInstance(g, np.zeros((3, 3)), 0.0)
    c = hlf.build_hlf_circuit(inst)
    assert [op.kind for op in c.ops].count("CZ") == 0
    # H then H is the identity, so the output is always all zeros
    z = hlf.solve(inst, None, 500, np.random.default_rng(4))
    assert not z.any()
    assert hlf.verify_solution(inst, [0, 0, 0])
    assert not hlf.verify_solution(inst, [1, 0, 0])
    assert hlf.brute_force_solutions(inst) == {(0, 0, 0)}


def test_trivial_kernel_accepts_every_z():
    g = GridGraph.rect(1, 3)
    inst = hlf.HlfInstance(g, np.eye(3), 1.0)
    assert len(hlf.brute_force_solutions(inst)) == 8
    assert all(hlf.verify_solution(inst, z) for z in all_vectors(3))
    one = hlf.HlfInstance(GridGraph.rect(1, 1), [[1]], 1.0)
    z = hlf.solve(one, None, 200, np.random.default_rng(5))
    assert set(z[:, 0]) == {0, 1}
    assert hlf.verify_many(one, z).all()


def test_verify_rejects_wrong_length():
    inst = instance(2, 2, 0.5, 6)
    with pytest.raises(ValueError):
        hlf.verify_solution(inst, [0, 1, 0])


def test_noiseless_solutions_verify_at_n25():
    grid = GridGraph.centered(25)
    rng = np.random.default_rng(7)
    for i in range(100):
        inst = hlf.random_instance(grid, 0.5, rng)
        assert hlf.verify_many(inst, hlf.solve(inst, None, 100, rng)).all()


def test_brute_force_matches_basis_check():
    rng = np.random.default_rng(8)
    grid = GridGraph.rect(3, 3)
    Z = all_vectors(9)
    for _ in range(100):
        inst = hlf.random_instance(grid, 0.5, rng)
        brute = hlf.brute_force_solutions(inst)
        fast = {tuple(int(v) for v in z) for z in Z[hlf.verify_many(inst, Z)]}
        assert brute == fast
        sampled = hlf.solve(inst, None, 50, rng)
        assert {tuple(int(v) for v in z) for z in sampled} <= brute


def test_brute_force_limits():
    inst = hlf.random_instance(GridGraph.rect(4, 5), 0.5, np.random.default_rng(9))
    with pytest.raises(ValueError):
        hlf.brute_force_solutions(inst)


# metrics -----------------------------------------------------------------

def test_depth_metrics():
    assert hlf.effective_depth(1.0) == 4
    assert hlf.effective_depth(7 / 8) == pytest.approx(32 / 7)
    assert hlf.effective_depth(2 / 3) == pytest.approx(6)
    assert math.isnan(hlf.effective_depth(0.0))
    assert hlf.tts(8, 0.5) == 16
    with pytest.raises(ValueError):
        hlf.effective_depth(1.5)


def test_classical_bounds():
    assert hlf.classical_depth_bound(GridGraph.rect(3, 3)) == pytest.approx(math.log2(21))
    assert hlf.classical_depth_bound(GridGraph.rect(2, 1)) == pytest.approx(1.585, abs=1e-3)
    big = GridGraph.centered(105)
    assert hlf.classical_depth_bound(big) > hlf.effective_depth(2 / 3)
    assert hlf.bravyi_bound_extrapolation(65536, 16) == 16
    assert hlf.bravyi_bound_extrapolation(65000, 1) == pytest.approx(1.0, abs=1e-3)
    assert hlf.bravyi_bound_extrapolation(100, 0) == 0
    with pytest.raises(ValueError):
        hlf.bravyi_bound_extrapolation(1, 1)


def test_report_fields():
    inst = instance(3, 3, 0.5, 10)
    r = hlf.run_instance(inst, None, 100, np.random.default_rng(11))
    assert (r.correct, r.fraction, r.effective_depth, r.tts) == (100, 1.0, 4.0, 4.0)
    assert not r.undefined
    assert r.L_classical == pytest.approx(math.log2(21))


def test_default_rate_largest_grid():
    grid = GridGraph.centered(105)
    rng = np.random.default_rng(12)
    fr = [hlf.run_instance(hlf.random_instance(grid, 0.5, rng), NoiseParams.paper_rates(),
                           100, rng).fraction for _ in range(20)]
    frac = float(np.mean(fr))
    assert 0.5 < frac < 1
    assert 4 <= hlf.effective_depth(frac) <= 8


# instance files ----------------------------------------------------------

@pytest.mark.parametrize("n", [9, 16, 105])
def test_instance_file_round_trip(tmp_path, n):
    inst = hlf.random_instance(GridGraph.centered(n), 0.5, np.random.default_rng(n), seed=n)
    path = tmp_path / "inst.txt"
    hlf.write_instance(inst, path)
    back = hlf.read_instance(path)
    assert np.array_equal(back.A, inst.A) and back.seed == n and back.p_gate == 0.5
    assert np.array_equal(back.grid.mask, inst.grid.mask)
    assert hlf.format_instance(back) == path.read_text()


def test_instance_parse_errors():
    with pytest.raises(ValueError, match="line 2"):
        hlf.parse_instance("rows 2\ncolz 2\n")
    with pytest.raises(ValueError, match="p_gate"):
        hlf.parse_instance("rows 1\ncols 2\nentries\n")
    with pytest.raises(ValueError, match="out of range"):
        hlf.parse_instance("rows 1\ncols 2\np_gate 0.5\nentries\n0 5\n")
    with pytest.raises(ValueError):
        hlf.parse_instance("rows 1\ncols 3\np_gate 0.5\nentries\n0 2\n")


def test_parse_bits():
    assert list(hlf.parse_bits("0110")) == [0, 1, 1, 0]
    with pytest.raises(ValueError):
        hlf.parse_bits("01a")
    with pytest.raises(ValueError):
        hlf.parse_bits("01", 3)
