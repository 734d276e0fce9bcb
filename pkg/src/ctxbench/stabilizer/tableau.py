"""Stabilizer tableau simulation (stabilizer + destabilizer rows, packed).

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers. Phases of
stabilizer rows are sign bits; products are formed with full ``i**k``
bookkeeping and checked to land on +-1.
"""

from __future__ import annotations

import numpy as np

from . import rules
from .bits import locate, n_words, phase_exponent, popcount
from .circuit import MEASURE, NON_CLIFFORD, RESET, Circuit, MeasurementRecord
from .pauli import PauliString


class StabilizerTableau:
    __slots__ = ("num_qubits", "x", "z", "r")

    def __init__(self, num_qubits: int):
        if num_qubits < 1:
            raise ValueError("tableau needs at least one qubit (n >= 1)")
        n = num_qubits
        w = n_words(n)
        self.num_qubits = n
        self.x = np.zeros((2 * n, w), np.uint64)
        self.z = np.zeros((2 * n, w), np.uint64)
        self.r = np.zeros(2 * n, bool)
        for q in range(n):
            wq, m = locate(q)
            self.x[q, wq] |= m
            self.z[n + q, wq] |= m

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.num_qubits = self.num_qubits
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # rows as PauliStrings ---------------------------------------------------
    def _row(self, i: int) -> PauliString:
        return PauliString(self.num_qubits, self.x[i], self.z[i], 2 * int(self.r[i]))

    def stabilizers(self) -> list[PauliString]:
        n = self.num_qubits
        return [self._row(n + i) for i in range(n)]

    def destabilizers(self) -> list[PauliString]:
        return [self._row(i) for i in range(self.num_qubits)]

    def _check_qubit(self, q: int):
        if not 0 <= q < self.num_qubits:
            raise ValueError(f"qubit {q} out of range for {self.num_qubits} qubits")

    # gates ------------------------------------------------------------------
    def apply(self, gate: str, *targets: int) -> "StabilizerTableau":
        if gate not in rules.CLIFFORD:
            raise ValueError(f"unknown gate kind {gate!r}")
        arity = 2 if gate in rules.TWO_QUBIT else 1
        if len(targets) != arity:
            raise ValueError(f"{gate} takes {arity} target(s)")
        for q in targets:
            self._check_qubit(q)
        if len(set(targets)) != len(targets):
            raise ValueError("two-qubit gate targets must be distinct")
        self.r ^= rules.conjugate(gate, self.x, self.z, targets)
        return self

    def apply_pauli(self, p: PauliString) -> "StabilizerTableau":
        """Apply Pauli ``p`` to the state: flips the sign of anticommuting rows."""
        if p.num_qubits != self.num_qubits:
            raise ValueError("Pauli size does not match tableau")
        anti = popcount((self.x & p.zs) ^ (self.z & p.xs)) & 1
        self.r ^= anti.astype(bool)
        return self

    # row products -----------------------------------------------------------
    def _left_multiply(self, rows: np.ndarray, p: int):
        """rows <- row_p * rows, for every index in ``rows``."""
        if rows.size == 0:
            return
        g = phase_exponent(self.x[p], self.z[p], self.x[rows], self.z[rows])
        total = (2 * self.r[p] + 2 * self.r[rows].astype(np.int64) + g) % 4
        self.r[rows] = total >= 2
        self.x[rows] ^= self.x[p]
        self.z[rows] ^= self.z[p]

    def _stabilizer_product(self, picks) -> tuple[np.ndarray, np.ndarray, int]:
        """Product of the chosen stabilizer rows, with its exponent of i."""
        w = self.x.shape[1]
        ax = np.zeros(w, np.uint64)
        az = np.zeros(w, np.uint64)
        k = 0
        for i in picks:
            row = self.num_qubits + int(i)
            k += int(phase_exponent(ax, az, self.x[row], self.z[row])) + 2 * int(self.r[row])
            ax ^= self.x[row]
            az ^= self.z[row]
        return ax, az, k % 4

    # measurement ------------------------------------------------------------
    def is_deterministic(self, q: int) -> bool:
        self._check_qubit(q)
        w, m = locate(q)
        return not (self.x[self.num_qubits:, w] & m).any()

    def measure(self, q: int, rng: np.random.Generator | None = None,
                forced: int | None = None) -> int:
        """Projective Z measurement of qubit ``q``; collapses the state."""
        self._check_qubit(q)
        n = self.num_qubits
        w, m = locate(q)
        hits = np.flatnonzero((self.x[:, w] & m) != 0)
        stab = hits[hits >= n]
        if stab.size == 0:
            destab = hits[hits < n]
            _, _, k = self._stabilizer_product(destab)
            if k % 2:
                raise AssertionError("stabilizer product is not Hermitian")
            return k // 2
        p = int(stab[0])
        self._left_multiply(hits[hits != p], p)
        if forced is None:
            rng = rng if rng is not None else np.random.default_rng()
            outcome = int(rng.integers(2))
        else:
            outcome = int(forced) & 1
        d = p - n
        self.x[d] = self.x[p]
        self.z[d] = self.z[p]
        self.r[d] = self.r[p]
        self.x[p] = 0
        self.z[p] = 0
        self.z[p, w] = m
        self.r[p] = bool(outcome)
        return outcome

    def reset(self, q: int, rng: np.random.Generator | None = None) -> "StabilizerTableau":
        if self.measure(q, rng):
            self.apply("X", q)
        return self

    def expectation(self, p: PauliString) -> int:
        """+1/-1 if +-p is a stabilizer, 0 if p anticommutes with one."""
        if p.num_qubits != self.num_qubits:
            raise ValueError("Pauli size does not match tableau")
        n = self.num_qubits
        anti = (popcount((self.x & p.zs) ^ (self.z & p.xs)) & 1).astype(bool)
        if anti[n:].any():
            return 0
        ax, az, k = self._stabilizer_product(np.flatnonzero(anti[:n]))
        if not (np.array_equal(ax, p.xs) and np.array_equal(az, p.zs)):
            raise AssertionError("Pauli commutes with all stabilizers but is not generated")
        rel = (k - p.phase) % 4
        if rel % 2:
            return 0  # non-Hermitian input; no real eigenvalue
        return 1 if rel == 0 else -1

    def check_invariants(self) -> None:
        """Raise AssertionError unless the tableau is a valid stabilizer frame."""
        n = self.num_qubits
        sym = (popcount(self.x[:, None, :] & self.z[None, :, :])
               + popcount(self.z[:, None, :] & self.x[None, :, :])) & 1
        want = np.zeros((2 * n, 2 * n), np.int64)
        idx = np.arange(n)
        want[idx, n + idx] = 1
        want[n + idx, idx] = 1
        if not np.array_equal(sym, want):
            raise AssertionError("tableau commutation structure broken")
        # independence follows from the symplectic pairing above


def new_tableau(n: int) -> StabilizerTableau:
    return StabilizerTableau(n)


def apply_clifford(t: StabilizerTableau, gate: str, targets) -> StabilizerTableau:
    if isinstance(targets, int):
        targets = (targets,)
    return t.apply(gate, *targets)


def pauli_expectation(t: StabilizerTableau, p: PauliString | str) -> int:
    if isinstance(p, str):
        p = PauliString.from_label(p)
    return t.expectation(p)


def measure_z(t: StabilizerTableau, q: int, rng: np.random.Generator | None = None):
    return t.measure(q, rng), t


def reset(t: StabilizerTableau, q: int, rng: np.random.Generator | None = None):
    return t.reset(q, rng)


def apply_pauli_error(t: StabilizerTableau, p: PauliString | str) -> StabilizerTableau:
    if isinstance(p, str):
        p = PauliString.from_label(p)
    return t.apply_pauli(p)


def run_tableau(circuit: Circuit, rng: np.random.Generator | None = None,
                tableau: StabilizerTableau | None = None, on_op=None):
    """Execute ``circuit`` once. Returns ``(tableau, MeasurementRecord)``.

    ``on_op(tableau, op_index, op)`` is called after every op, which is how
    error injection hooks in.
    """
    if not circuit.is_clifford:
        raise ValueError("tableau simulation supports Clifford circuits only")
    rng = rng if rng is not None else np.random.default_rng()
    t = tableau if tableau is not None else StabilizerTableau(circuit.num_qubits)
    if t.num_qubits != circuit.num_qubits:
        raise ValueError("tableau and circuit sizes differ")
    record = MeasurementRecord()
    for i, op in enumerate(circuit.ops):
        if op.kind == MEASURE:
            record.bits[op.key] = t.measure(op.targets[0], rng)
        elif op.kind == RESET:
            t.reset(op.targets[0], rng)
        elif op.kind in NON_CLIFFORD:
            raise ValueError(f"{op.kind} is not Clifford")
        else:
            t.apply(op.kind, *op.targets)
        if on_op is not None:
            on_op(t, i, op)
    return t, record
