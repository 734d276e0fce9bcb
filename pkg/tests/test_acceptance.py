"""End-to-end acceptance checks at their stated tolerances and time limits.

Each test carries a ``criterion`` marker; the conftest prints one PASS/FAIL
line per criterion at the end of the session.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxbench import dense, ghz_budget, hlf, ksb
from ctxbench.cli.experiments import analytic_crossing
from ctxbench.cli.main import main
from ctxbench.games import ghz, magic_square
from ctxbench.grid import GridGraph
from ctxbench.noise import NoiseParams, sample_circuit
from ctxbench.stabilizer import CLIFFORD, StabilizerTableau, random_clifford_circuit
from ctxbench.stabilizer.rules import TWO_QUBIT

PAPER = NoiseParams.paper_rates()
criterion = pytest.mark.criterion
SOUNDNESS = "simulator soundness: sampling TVD, tableau invariants, byte-identical CSVs"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@criterion(1, "noiseless magic square wins every shot in both variations")
def test_noiseless_magic_square():
    with Timer() as t:
        rng = np.random.default_rng(1)
        for v in magic_square.VARIATIONS:
            games = magic_square.play_all_games(v, None, 10_000, rng)
            assert len(games) == 9
            assert all(g.win_rate == 1.0 for g in games)
    assert t.elapsed < 10


@criterion(2, "exhaustive classical magic square optimum is 8/9")
def test_classical_magic_square_optimum():
    with Timer() as t:
        value, _, count = magic_square.optimal_classical_strategy()
    assert value == Fraction(8, 9) and count > 0
    assert t.elapsed < 1


@criterion(3, "noncontextual bound 4 and noiseless streamed chi 6")
def test_ksb_bounds():
    with Timer() as t:
        hi, _, _ = ksb.nchv_bound_exhaustive()
        rng = np.random.default_rng(3)
        run = ksb.run_ksb(ksb.random_context_sequence(180, rng), 100, None, rng)
        chi = ksb.chi_ksb(run).chi
    assert hi == 4
    assert chi == 6.0
    assert t.elapsed < 30


@criterion(4, "noiseless repeated-measurement agreement 1 and 1/2")
def test_p_agree():
    rng = np.random.default_rng(4)
    run = ksb.run_ksb(ksb.random_context_sequence(180, rng), 1000, None, rng)
    stats = ksb.p_agree_stats(run).values()
    comp = [s for s in stats if s.compatible_n]
    inc = [s for s in stats if s.incompatible_n]
    assert comp and inc
    assert all(s.compatible_rate == 1.0 for s in comp)
    for s in inc:
        sigma = math.sqrt(s.incompatible_rate * (1 - s.incompatible_rate) / s.incompatible_n)
        assert abs(s.incompatible_rate - 0.5) <= 5 * sigma


@criterion(5, "GHZ game noiseless wins and exhaustive classical optimum")
def test_ghz_game(capsys):
    with Timer() as t:
        rng = np.random.default_rng(5)
        for N in (2, 3, 8, 16, 25):
            grid = GridGraph.centered(N)
            for g in range(10):
                inst = ghz.GhzGameInstance.create(ghz.sample_questions(N, rng), g, grid)
                assert ghz.play_ghz_game(inst, None, rng, 1000).all()
        rows = []
        for N in range(2, 7):
            value, _ = ghz.classical_optimal_exhaustive(N)
            rows.append((N, value, ghz.classical_bound_formula(N)))
    with capsys.disabled():
        for N, v, f in rows:
            flag = "" if float(v) == f else "  <- disagrees with 1/2 + 2^-floor(N/2)"
            print(f"\n  GHZ N={N}: exhaustive {v} = {float(v):.5f}, formula {f:.5f}{flag}", end="")
        print()
    values = {N: v for N, v, _ in rows}
    assert values == {2: 1, 3: Fraction(3, 4), 4: Fraction(3, 4), 5: Fraction(5, 8),
                      6: Fraction(5, 8)}
    assert [N for N, v, f in rows if float(v) != f] == [3, 5]
    assert t.elapsed < 120


@criterion(6, "noiseless HLF solutions verify, depth 4, brute force agrees")
def test_hlf():
    with Timer() as t:
        rng = np.random.default_rng(6)
        total = 0
        for n in (9, 16, 25, 49, 81, 105):
            grid = GridGraph.centered(n)
            for _ in range(20):
                r = hlf.run_instance(hlf.random_instance(grid, 0.5, rng), None, 100, rng)
                assert r.fraction == 1.0 and r.effective_depth == 4.0
                total += r.shots
        assert total >= 10_000
        grid = GridGraph.rect(4, 4)
        Z = np.array([[(z >> (15 - i)) & 1 for i in range(16)] for z in range(1 << 16)], np.uint8)
        for _ in range(100):
            inst = hlf.random_instance(grid, 0.5, rng)
            fast = {tuple(int(v) for v in z) for z in Z[hlf.verify_many(inst, Z)]}
            assert fast == hlf.brute_force_solutions(inst)
    assert t.elapsed < 300


@criterion(7, "closed-form fidelities match the dense oracle and Monte Carlo")
def test_analytic_vs_oracle():
    T1 = PAPER.T1
    rng = np.random.default_rng(7)
    for N in range(2, 7):
        t = rng.uniform(0, 2 * T1, N)
        s = dense.DenseState.ghz(N).to_mixed()
        for q in range(N):
            dense.apply_dd_idle(s, q, t[q], T1)
        assert abs(dense.fidelity_to_ghz(s) - ghz_budget.f_t1(t, T1).total) <= 1e-3
    ro = NoiseParams(epsilon=PAPER.e0)
    for N in (10, 45):
        g = ghz.bfs_growth(GridGraph.centered(N), rng)
        r = ghz_budget.estimate_fidelity_mc(g, ro, ghz_budget.default_m(N, 100), 4000, rng,
                                            rotation_noise=False)
        want = ghz_budget.f_readout(epsilon=PAPER.e0, N=N)
        assert abs(r.F_X - want.x) <= 3 * r.sigma_X
        assert abs(r.F - want.total) <= 3 * r.sigma
    dep = NoiseParams(e_p_sq=PAPER.e_p_sq, e_p_2q=PAPER.e_p_2q)
    g = ghz.bfs_growth(GridGraph.centered(10), rng)
    r = ghz_budget.estimate_fidelity_mc(g, dep, 200, 4000, rng, rotation_noise=False)
    sched = ghz_budget.schedule_from_growth(g, dep)
    want = ghz_budget.f_sq(sched.n_sq, dep.e_p_sq).total * ghz_budget.f_2q(sched.n_2q,
                                                                           dep.e_p_2q).total
    assert abs(r.F - want) <= 3 * r.sigma


@criterion(8, "default hardware-rate bands for all four protocols")
def test_default_rate_bands(capsys):
    rng = np.random.default_rng(8)
    v1 = np.mean([g.win_rate for g in magic_square.play_all_games(1, PAPER, 10_000, rng)])
    v2 = np.mean([g.win_rate for g in magic_square.play_all_games(2, PAPER, 10_000, rng)])
    run = ksb.run_ksb(ksb.random_context_sequence(180, rng), 1000, PAPER, rng)
    chi = ksb.chi_ksb(run).chi
    crossing = analytic_crossing(PAPER, seed=8)
    grid = GridGraph.centered(105)
    fr = np.mean([hlf.run_instance(hlf.random_instance(grid, 0.5, rng), PAPER, 100, rng).fraction
                  for _ in range(50)])
    depth = hlf.effective_depth(float(fr))
    with capsys.disabled():
        print(f"\n  variation I {v1:.4f}, variation II {v2:.4f}, chi {chi:.3f}, "
              f"F_total crossing N={crossing}, HLF n=105 effective depth {depth:.3f}")
    assert 0.96 <= v1 <= 0.995
    assert 0.91 <= v2 <= 0.96
    assert 5.0 <= chi < 6.0
    assert crossing is not None and 35 <= crossing <= 55
    assert 4 <= depth <= 8


@criterion(9, SOUNDNESS)
def test_tableau_vs_dense_tvd():
    # fixed seed; at 8 qubits with full support the expected TVD from
    # 1e5 shots alone is about 0.02, so this threshold sits near the noise floor
    rng = np.random.default_rng(20261014)
    shots = 100_000
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        c = random_clifford_circuit(n, int(rng.integers(1, 51)), rng)
        bits = sample_circuit(c, None, shots, rng).get_many(c.measurement_keys).astype(np.int64)
        emp = np.bincount(bits @ (1 << np.arange(n - 1, -1, -1)), minlength=2**n) / shots
        exact = np.zeros(2**n)
        for k, p in dense.terminal_distribution(c).items():
            exact[int(k, 2)] = p
        worst = max(worst, 0.5 * float(np.abs(emp - exact).sum()))
    assert worst <= 0.02


@criterion(9, SOUNDNESS)
@settings(max_examples=200, deadline=None)
@given(st.integers(1, 70), st.lists(st.tuples(st.sampled_from(CLIFFORD + ("M", "R")),
                                              st.integers(0, 69), st.integers(0, 69)),
                                    max_size=300), st.integers(0, 2**32 - 1))
def test_tableau_invariants(n, ops, seed):
    rng = np.random.default_rng(seed)
    t = StabilizerTableau(n)
    for kind, a, b in ops:
        a, b = a % n, b % n
        if kind == "M":
            t.measure(a, rng)
        elif kind == "R":
            t.reset(a, rng)
        elif kind in TWO_QUBIT:
            if a != b:
                t.apply(kind, a, b)
        else:
            t.apply(kind, a)
    t.check_invariants()


@criterion(9, SOUNDNESS)
@pytest.mark.parametrize("text", [
    "experiment=magic_square\nshots=500\nseed=11\nnoise=paper\n",
    "experiment=ksb\ncontexts=60\nshots=50\nseed=11\nnoise=paper\n",
    "experiment=ghz_game\nN=4,9\ngames=4\ngrowth_seeds=5\nshots=100\nseed=11\nnoise=paper\n",
    "experiment=ghz_fidelity\nN=4,9\nm=16\nshots=200\nseed=11\nnoise=paper\n",
    "experiment=hlf\nsizes=9,25\ninstances=10\nshots=50\nseed=11\nnoise=paper\n",
], ids=["magic_square", "ksb", "ghz_game", "ghz_fidelity", "hlf"])
def test_byte_identical_csvs(tmp_path, text):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    outs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name),
                     "--threads", threads]) == 0
        outs.append(tmp_path / name)
    csvs = sorted(p.name for p in outs[0].glob("*.csv"))
    assert csvs
    for name in csvs:
        data = [(o / name).read_bytes() for o in outs]
        assert data[0] == data[1] == data[2]
