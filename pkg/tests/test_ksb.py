import math
from collections import Counter

import numpy as np
import pytest

from ctxbench import ksb
from ctxbench.noise import NoiseParams, sample_circuit
from ctxbench.stabilizer import Circuit, PauliString, random_clifford_circuit

PAPER = NoiseParams.paper_rates()


def five_sigma(p, n):
    return 5 * np.sqrt(p * (1 - p) / n)


def qnd_pair(label, prep=None):
    p = PauliString.from_label(label)
    c = Circuit(3)
    if prep is not None:
        c.extend(prep)
    c.extend(ksb.qnd_measure_circuit(p, key="m1"))
    c.extend(ksb.qnd_measure_circuit(p, key="m2"))
    return c


def test_qnd_zz_on_zero_state_is_deterministic():
    s = sample_circuit(qnd_pair("ZZ"), None, 1000, np.random.default_rng(0))
    assert not s.get("m1").any() and not s.get("m2").any()


@pytest.mark.parametrize("cell", range(9))
def test_qnd_repeat_agrees_on_random_states(cell):
    label = ksb.CELL_LABELS[cell]
    rng = np.random.default_rng(cell)
    prep = random_clifford_circuit(2, 20, rng, measure=False)
    s = sample_circuit(qnd_pair(label, prep), None, 2000, rng)
    assert np.array_equal(s.get("m1"), s.get("m2"))


def test_qnd_rejects_overlapping_ancilla():
    with pytest.raises(ValueError):
        ksb.qnd_measure_circuit(PauliString.from_label("XI"), data=(0, 1), ancilla=1)


def test_row_three_signed_product_on_random_input():
    rng = np.random.default_rng(1)
    prep = random_clifford_circuit(2, 25, rng, measure=False)
    c = Circuit(3)
    c.extend(prep)
    ops = ksb.Context("row", 3).ops
    for i, p in enumerate(ops):
        c.extend(ksb.qnd_measure_circuit(p, key=f"m{i}"))
    s = sample_circuit(c, None, 2000, rng)
    values = [ksb.outcome_value(p, s.get(f"m{i}")) for i, p in enumerate(ops)]
    assert (np.prod(values, axis=0) == 1).all()


def test_context_validation():
    with pytest.raises(ValueError):
        ksb.Context("diag", 1)
    with pytest.raises(ValueError):
        ksb.Context("row", 4)
    with pytest.raises(ValueError):
        ksb.Context("col", 1, (0, 0, 1))
    assert ksb.Context("col", 2).cells == (1, 4, 7)


def test_random_sequence_is_uniform():
    rng = np.random.default_rng(2)
    seq = ksb.random_context_sequence(180, rng)
    assert sum(len(ctx.measured_cells) for ctx in seq) == 540
    n = 10_000
    seq = ksb.random_context_sequence(n, rng)
    by_ctx = Counter(ctx.label for ctx in seq)
    by_order = Counter(ctx.order for ctx in seq)
    assert len(by_ctx) == 6 and len(by_order) == 6
    for v in list(by_ctx.values()) + list(by_order.values()):
        assert abs(v / n - 1 / 6) <= five_sigma(1 / 6, n)
    with pytest.raises(ValueError):
        ksb.random_context_sequence(0, rng)


@pytest.mark.parametrize("initial", ksb.INITIAL_STATES)
def test_noiseless_stream_reaches_quantum_value(initial):
    rng = np.random.default_rng(3)
    seq = ksb.random_context_sequence(180, rng)
    run = ksb.run_ksb(seq, 100, None, rng, initial)
    want = np.array([ctx.expected_product for ctx in seq])
    assert (run.products == want).all()
    assert ksb.chi_ksb(run).chi == 6.0


def test_streamed_chi_matches_isolated_contexts():
    rng = np.random.default_rng(4)
    iso = [ksb.run_ksb([ctx], 200, None, rng, "++") for ctx in ksb.CONTEXTS]
    assert ksb.chi_ksb(iso).chi == 6.0


def test_chi_from_outcome_objects_and_tables():
    ideal = [ksb.ContextOutcome(ctx, (1, 1, ctx.expected_product), 0) for ctx in ksb.CONTEXTS]
    assert ksb.chi_ksb(ideal).chi == 6
    ones = [ksb.ContextOutcome(ctx, (1, 1, 1), 0) for ctx in ksb.CONTEXTS]
    assert ksb.chi_ksb(ones).chi == 0
    assert ksb.chi_from_table(np.ones(9)) == 0
    with pytest.raises(ValueError):
        ksb.chi_ksb(ideal[:3])


def test_nchv_enumeration():
    hi, lo, count = ksb.nchv_bound_exhaustive()
    assert (hi, lo) == (4, -4)
    assert count > 0


def test_p_agree_noiseless():
    rng = np.random.default_rng(5)
    run = ksb.run_ksb(ksb.random_context_sequence(180, rng), 100, None, rng)
    stats = ksb.p_agree_stats(run)
    for label, s in stats.items():
        if s.compatible_n:
            assert s.compatible_rate == 1.0
        if s.incompatible_n:
            sigma = math.sqrt(0.25 / s.incompatible_n)
            assert abs(s.incompatible_rate - 0.5) <= 5 * sigma, label
    assert sum(s.incompatible_n for s in stats.values()) > 0


def test_recurrence_compatibility():
    seq = [ksb.Context("row", 1), ksb.Context("row", 1), ksb.Context("col", 1),
           ksb.Context("row", 1)]
    pairs = ksb.recurrence_pairs(seq)
    # IZ sits in every context here, so all its recurrences are compatible
    assert [p[3] for p in pairs if p[0] == 0] == [True, True, True]
    # ZI recurs across column 1, whose XI anticommutes with it
    assert [p[3] for p in pairs if p[0] == 1] == [True, False]


def test_default_rate_band_and_agreement():
    rng = np.random.default_rng(6)
    run = ksb.run_ksb(ksb.random_context_sequence(180, rng), 1000, PAPER, rng)
    chi = ksb.chi_ksb(run).chi
    assert 5.0 <= chi < 6.0
    rates = [s.compatible_rate for s in ksb.p_agree_stats(run).values() if s.compatible_n]
    assert 0.94 <= float(np.mean(rates)) <= 0.99


def test_streamed_chi_matches_density_oracle_under_noise():
    rng = np.random.default_rng(7)
    seq = ksb.random_context_sequence(24, rng)
    while len({ctx.label for ctx in seq}) < 6:
        seq = ksb.random_context_sequence(24, rng)
    noise = NoiseParams(e_p_sq=0.01, e_p_2q=0.03, e0=0.02, e1=0.04)
    run = ksb.run_ksb(seq, 4000, noise, rng)
    exact = ksb.exact_context_means(seq, noise)
    got = run.products.mean(axis=0)
    sig = np.sqrt(np.maximum(1 - np.asarray(exact) ** 2, 1e-12) / run.shots)
    assert (np.abs(got - exact) <= 5 * sig).all()


def test_phase_sweep():
    rng = np.random.default_rng(8)
    seq = [ksb.Context(k, i, ksb.ORDERS[int(rng.integers(6))])
           for _ in range(2) for k in ksb.KINDS for i in (1, 2, 3)]
    sweep = dict(ksb.phase_error_sweep([0.0, math.pi], None, seq))
    assert sweep[0.0] == pytest.approx(6.0)
    assert sweep[math.pi] == pytest.approx(-6.0)
    sym = ksb.phase_error_sweep([-0.4, -0.1, 0.1, 0.4], None, seq)
    values = [chi for _, chi in sym]
    assert values[0] == pytest.approx(values[3]) and values[1] == pytest.approx(values[2])
    assert max(values) < 6.0
    with pytest.raises(ValueError):
        ksb.phase_error_sweep([], None, seq)
