import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxbench import dense
from ctxbench.noise import sample_circuit
from ctxbench.stabilizer import (
    CLIFFORD,
    Circuit,
    PauliString,
    StabilizerTableau,
    apply_clifford,
    apply_pauli_error,
    measure_z,
    new_tableau,
    pauli_expectation,
    random_clifford_circuit,
    reset,
    run_tableau,
)
from ctxbench.stabilizer.rules import TWO_QUBIT


def five_sigma(p, n):
    return 5 * np.sqrt(p * (1 - p) / n)


def bell(n=2):
    t = new_tableau(n)
    apply_clifford(t, "H", [0])
    apply_clifford(t, "CNOT", [0, 1])
    return t


# pauli strings -----------------------------------------------------------

def test_pauli_products_and_signs():
    x, y, z = (PauliString.from_label(s) for s in "XYZ")
    assert x * y == PauliString.from_label("iZ")
    assert y * x == PauliString.from_label("-iZ")
    assert x * x == PauliString.identity(1)
    assert str(PauliString.from_label("-XZ")) == "-XZ"
    assert not PauliString.from_label("XI").commutes(PauliString.from_label("ZI"))
    assert PauliString.from_label("XX").commutes(PauliString.from_label("ZZ"))


labels = st.text(alphabet="IXYZ", min_size=3, max_size=3)


@given(labels, labels, labels, st.integers(0, 3), st.integers(0, 3))
def test_pauli_group_is_associative(a, b, c, pa, pb):
    p = PauliString.from_label(a)
    p.phase = pa
    q = PauliString.from_label(b)
    q.phase = pb
    r = PauliString.from_label(c)
    assert (p * q) * r == p * (q * r)


@given(labels, labels)
def test_pauli_product_matches_matrices(a, b):
    p, q = PauliString.from_label(a), PauliString.from_label(b)
    m = {"I": np.eye(2), "X": dense.GATES["X"], "Y": dense.GATES["Y"], "Z": dense.GATES["Z"]}

    def mat(ps):
        out = np.array([[1.0 + 0j]])
        for ch in str(ps).lstrip("+-i"):
            out = np.kron(out, m[ch])
        return ps.sign * out

    assert np.allclose(mat(p * q), mat(p) @ mat(q))


# new_tableau and gates ---------------------------------------------------

def test_new_tableau_zero_state():
    t = new_tableau(3)
    assert pauli_expectation(t, "ZII") == 1
    assert pauli_expectation(t, "XII") == 0
    rng = np.random.default_rng(0)
    assert all(measure_z(new_tableau(1), 0, rng)[0] == 0 for _ in range(1000))
    with pytest.raises(ValueError):
        new_tableau(0)


def test_unknown_gate_and_range_rejected():
    t = new_tableau(2)
    with pytest.raises(ValueError):
        apply_clifford(t, "T", [0])
    with pytest.raises(ValueError):
        apply_clifford(t, "H", [2])


def test_plus_state_statistics():
    c = Circuit(1)
    c.append("H", 0)
    c.append("MEASURE_Z", 0, key="m")
    bits = sample_circuit(c, None, 100_000, np.random.default_rng(1)).get("m")
    assert abs(bits.mean() - 0.5) <= five_sigma(0.5, 100_000)


def test_bell_and_ghz_sign_examples():
    t = bell()
    assert pauli_expectation(t, "XX") == 1
    assert pauli_expectation(t, "ZZ") == 1
    t = new_tableau(3)
    for g, q in [("H", [0]), ("CNOT", [0, 1]), ("CNOT", [1, 2]), ("Z", [0])]:
        apply_clifford(t, g, q)
    assert pauli_expectation(t, "XYY") == 1
    assert pauli_expectation(t, "XXX") == -1


def test_ghz4_yyxx_matches_dense():
    t = new_tableau(4)
    apply_clifford(t, "H", [0])
    for q in range(3):
        apply_clifford(t, "CNOT", [q, q + 1])
    s = dense.DenseState.ghz(4)
    want = dense.pauli_expectation_dense(s, "YYXX")
    assert want == pytest.approx(-1.0)
    assert pauli_expectation(t, "YYXX") == -1


def test_expectation_size_mismatch():
    with pytest.raises(ValueError):
        pauli_expectation(new_tableau(2), "XXX")


# measurement and reset ---------------------------------------------------

def test_measure_deterministic_and_repeatable():
    rng = np.random.default_rng(2)
    t = new_tableau(1)
    apply_clifford(t, "X", [0])
    assert measure_z(t, 0, rng)[0] == 1
    for _ in range(10_000):
        t = new_tableau(1)
        apply_clifford(t, "H", [0])
        a, _ = measure_z(t, 0, rng)
        b, _ = measure_z(t, 0, rng)
        assert a == b


def test_bell_measurements_agree():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        t = bell()
        a, _ = measure_z(t, 0, rng)
        b, _ = measure_z(t, 1, rng)
        assert a == b


def test_reset_examples():
    rng = np.random.default_rng(4)
    t = new_tableau(1)
    apply_clifford(t, "X", [0])
    reset(t, 0, rng)
    assert measure_z(t, 0, rng)[0] == 0
    t = new_tableau(1)
    apply_clifford(t, "H", [0])
    reset(t, 0, rng)
    assert t.is_deterministic(0) and measure_z(t, 0, rng)[0] == 0


def test_reset_of_ancilla_matches_dense_partial_trace():
    # reset = measure then conditional X; averaging the two forced branches
    # (each has probability 1/2 here) gives the exact post-reset expectations
    rng = np.random.default_rng(5)
    prep = random_clifford_circuit(3, 30, rng, measure=False)
    s = dense.DenseState(3, mixed=True)
    for op in prep.ops:
        dense.apply_gate_dense(s, op.kind, op.targets)
    dense.reset_dense(s, 2)
    pair = dense.partial_trace(s, [0, 1])
    base, _ = run_tableau(prep, rng)
    branches = []
    for b in (0, 1):
        t = base.copy()
        if t.is_deterministic(2):
            weight = 1.0 if t.copy().measure(2) == b else 0.0
        else:
            weight = 0.5
        t.measure(2, forced=b)
        if b:
            t.apply("X", 2)
        branches.append((weight, t))
    for label in all_paulis(2):
        got = sum(w * pauli_expectation(t, label + "I") for w, t in branches if w)
        assert got == pytest.approx(dense.pauli_expectation_dense(pair, label), abs=1e-9)
        assert all(pauli_expectation(t, "IIZ") == 1 for w, t in branches if w)


def test_pauli_error_examples():
    rng = np.random.default_rng(6)
    t = new_tableau(1)
    apply_pauli_error(t, "X")
    assert measure_z(t, 0, rng)[0] == 1
    t = new_tableau(2)
    before = [pauli_expectation(t, "".join(p)) for p in itertools.product("IXYZ", repeat=2)]
    apply_pauli_error(t, "ZI")
    after = [pauli_expectation(t, "".join(p)) for p in itertools.product("IXYZ", repeat=2)]
    assert before == after
    t = bell()
    apply_pauli_error(t, "XI")
    assert pauli_expectation(t, "ZZ") == -1
    apply_pauli_error(t, "XI")
    assert pauli_expectation(t, "ZZ") == 1
    with pytest.raises(ValueError):
        apply_pauli_error(t, "XXX")


# cross-checks with the dense simulator -----------------------------------

def all_paulis(n):
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


@pytest.mark.parametrize("seed", range(12))
def test_expectations_match_dense(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    c = random_clifford_circuit(n, int(rng.integers(1, 40)), rng, measure=False)
    t, _ = run_tableau(c, rng)
    s = dense.DenseState(n)
    for op in c.ops:
        dense.apply_gate_dense(s, op.kind, op.targets)
    for label in all_paulis(n):
        assert pauli_expectation(t, label) == round(dense.pauli_expectation_dense(s, label))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.lists(st.tuples(st.sampled_from(CLIFFORD + ("M", "R")),
                                                st.integers(0, 11), st.integers(0, 11)),
                                      max_size=200), st.integers(0, 2**32 - 1))
def test_invariants_after_random_ops(n, ops, seed):
    rng = np.random.default_rng(seed)
    t = StabilizerTableau(n)
    for kind, a, b in ops:
        a, b = a % n, b % n
        if kind == "M":
            t.measure(a, rng)
        elif kind == "R":
            t.reset(a, rng)
        elif kind in TWO_QUBIT:
            if a == b:
                continue
            t.apply(kind, a, b)
        else:
            t.apply(kind, a)
    t.check_invariants()


def test_wide_register_crosses_word_boundary():
    n = 130
    t = new_tableau(n)
    t.apply("H", 0)
    for q in range(n - 1):
        t.apply("CNOT", q, q + 1)
    t.check_invariants()
    assert pauli_expectation(t, PauliString.sparse(n, {0: "Z", 129: "Z"})) == 1
    assert pauli_expectation(t, PauliString.from_label("X" * n)) == 1
    rng = np.random.default_rng(7)
    bit, _ = measure_z(t, 64, rng)
    assert all(measure_z(t, q, rng)[0] == bit for q in (0, 63, 65, 129))
