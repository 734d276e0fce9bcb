"""Streamed contextuality test on the magic-square observables.

Two data qubits are measured again and again through one ancilla. Each
context is a row or column of the plan, measured as three QND Pauli
measurements in random order. Rows multiply to +1 and columns to -1, so the
quantum value of chi = sum <R_i> - sum <C_i> is 6, while any noncontextual
value assignment stays at or below 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from . import dense
from .games.magic_square import COL_PRODUCT, PLAN, ROW_PRODUCT
from .noise import NoiseParams, sample_circuit
from .stabilizer.circuit import MEASURE, RESET, Circuit
from .stabilizer.compile import append_controlled_pauli
from .stabilizer.pauli import PauliString
from .stabilizer.rules import TWO_QUBIT

DATA = (0, 1)
ANCILLA = 2
KINDS = ("row", "col")
ORDERS = tuple(permutations(range(3)))
INITIAL_STATES = ("00", "++", "bell")
# cell ids 0..8 are row-major positions in the plan
CELL_LABELS = tuple(str(PLAN[r][c]) for r in range(3) for c in range(3))


@dataclass(frozen=True)
class Context:
    kind: str
    index: int
    order: tuple[int, int, int] = (0, 1, 2)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"context kind must be 'row' or 'col', got {self.kind!r}")
        if self.index not in (1, 2, 3):
            raise ValueError("context index must be 1, 2 or 3")
        if tuple(sorted(self.order)) != (0, 1, 2):
            raise ValueError("order must be a permutation of (0, 1, 2)")

    @property
    def cells(self) -> tuple[int, int, int]:
        """Plan cells of this line in plan order."""
        i = self.index - 1
        if self.kind == "row":
            return (3 * i, 3 * i + 1, 3 * i + 2)
        return (i, 3 + i, 6 + i)

    @property
    def ops(self) -> tuple[PauliString, ...]:
        return tuple(PLAN[c // 3][c % 3] for c in self.cells)

    @property
    def measured_cells(self) -> tuple[int, ...]:
        return tuple(self.cells[o] for o in self.order)

    @property
    def expected_product(self) -> int:
        return ROW_PRODUCT if self.kind == "row" else COL_PRODUCT

    @property
    def label(self) -> str:
        return f"{'R' if self.kind == 'row' else 'C'}{self.index}"


CONTEXTS = tuple(Context(k, i) for k in KINDS for i in (1, 2, 3))


@dataclass(frozen=True)
class ContextOutcome:
    context: Context
    values: tuple[int, int, int]  # in measurement order
    position: int

    @property
    def product(self) -> int:
        return int(np.prod(self.values))


@dataclass
class KsbSummary:
    means: dict[str, float]
    sigmas: dict[str, float]
    counts: dict[str, int]
    chi: float
    sigma: float


def qnd_measure_circuit(p: PauliString, data=DATA, ancilla: int = ANCILLA,
                        num_qubits: int | None = None, key: str | None = None,
                        reset: bool = True, phase: float | None = None) -> Circuit:
    """Ancilla-assisted QND measurement of ``p`` on ``data``.

    Ancilla: H, controlled-P, [RZ(phase)], H, measure, reset. Outcome bit b
    means eigenvalue ``(-1)**b`` times the sign of ``p``.
    """
    data = tuple(data)
    if ancilla in data:
        raise ValueError("ancilla overlaps the data qubits")
    n = num_qubits if num_qubits is not None else max(data + (ancilla,)) + 1
    c = Circuit(n)
    c.append("H", ancilla)
    append_controlled_pauli(c, ancilla, p, data)
    if phase:
        c.append("RZ", ancilla, angle=phase)
    c.append("H", ancilla)
    c.append("MEASURE_Z", ancilla, key=key)
    if reset:
        c.append("RESET", ancilla)
    return c


def outcome_value(p: PauliString, bit) -> np.ndarray:
    sign = 1 if p.phase == 0 else -1
    return sign * (1 - 2 * np.asarray(bit, np.int64))


def random_context_sequence(length: int, rng: np.random.Generator) -> list[Context]:
    """I.i.d. uniform contexts, each with a uniformly random measurement order."""
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    ctx = rng.integers(0, 6, size=length)
    order = rng.integers(0, 6, size=length)
    return [Context(CONTEXTS[c].kind, CONTEXTS[c].index, ORDERS[o]) for c, o in zip(ctx, order)]


def _prepare(c: Circuit, initial: str):
    if initial not in INITIAL_STATES:
        raise ValueError(f"initial state must be one of {INITIAL_STATES}")
    if initial == "++":
        c.append("H", DATA[0])
        c.append("H", DATA[1])
    elif initial == "bell":
        c.append("H", DATA[0])
        c.append("CNOT", DATA[0], DATA[1])


def build_ksb_circuit(sequence, initial: str = "00", phase: float | None = None) -> Circuit:
    """One continuous circuit; measurement keys are ``"t{pos}_{slot}"``."""
    c = Circuit(3)
    _prepare(c, initial)
    for t, ctx in enumerate(sequence):
        for slot, cell in enumerate(ctx.measured_cells):
            p = PLAN[cell // 3][cell % 3]
            c.extend(qnd_measure_circuit(p, key=f"t{t}_{slot}", phase=phase))
    return c


@dataclass
class KsbRun:
    """Outcome values ``values[shot, pos, slot]`` in measurement order."""

    sequence: list[Context]
    values: np.ndarray

    @property
    def shots(self) -> int:
        return self.values.shape[0]

    @property
    def products(self) -> np.ndarray:
        return self.values.prod(axis=2)

    def outcomes(self, shot: int) -> list[ContextOutcome]:
        v = self.values[shot]
        return [ContextOutcome(ctx, tuple(int(a) for a in v[t]), t)
                for t, ctx in enumerate(self.sequence)]


def run_ksb(sequence, shots: int, noise: NoiseParams | None, rng: np.random.Generator,
            initial: str = "00") -> KsbRun:
    sequence = list(sequence)
    c = build_ksb_circuit(sequence, initial)
    s = sample_circuit(c, noise, shots, rng)
    vals = np.empty((shots, len(sequence), 3), np.int8)
    for t, ctx in enumerate(sequence):
        for slot, cell in enumerate(ctx.measured_cells):
            p = PLAN[cell // 3][cell % 3]
            vals[:, t, slot] = outcome_value(p, s.get(f"t{t}_{slot}"))
    return KsbRun(sequence, vals)


def _context_products(outcomes):
    """Map context label -> array of products, from runs or outcome lists."""
    acc: dict[str, list] = {ctx.label: [] for ctx in CONTEXTS}
    if isinstance(outcomes, KsbRun):
        outcomes = [outcomes]
    if outcomes and all(isinstance(o, KsbRun) for o in outcomes):
        for run in outcomes:
            prods = run.products
            for t, ctx in enumerate(run.sequence):
                acc[ctx.label].append(prods[:, t])
        return {k: np.concatenate(v) if v else np.empty(0) for k, v in acc.items()}
    for o in outcomes:
        if isinstance(o, list):
            for oo in o:
                acc[oo.context.label].append([oo.product])
        else:
            acc[o.context.label].append([o.product])
    return {k: np.concatenate(v) if v else np.empty(0) for k, v in acc.items()}


def chi_ksb(outcomes) -> KsbSummary:
    """Per-context means and chi with binomial error propagation.

    Each mean is 2p - 1 for a +-1 variable, so its error is
    sqrt((1 - mean**2) / n); the six errors add in quadrature.
    """
    prods = _context_products(outcomes)
    if any(v.size == 0 for v in prods.values()):
        empty = [k for k, v in prods.items() if v.size == 0]
        raise ValueError(f"no outcomes for contexts {empty}")
    means = {k: float(v.mean()) for k, v in prods.items()}
    counts = {k: int(v.size) for k, v in prods.items()}
    sig = {k: float(np.sqrt(max(0.0, 1 - means[k] ** 2) / counts[k])) for k in means}
    chi = sum(means[f"R{i}"] for i in (1, 2, 3)) - sum(means[f"C{i}"] for i in (1, 2, 3))
    return KsbSummary(means, sig, counts, chi, float(np.sqrt(sum(s * s for s in sig.values()))))


def chi_from_table(table) -> int:
    """chi of a fixed +-1 value assignment to the 9 cells."""
    t = np.asarray(table).reshape(3, 3)
    return int(t.prod(axis=1).sum() - t.prod(axis=0).sum())


def nchv_bound_exhaustive():
    """Enumerate all 512 noncontextual tables; return (max, min, argmax count)."""
    tables = np.array(list(product((1, -1), repeat=9))).reshape(-1, 3, 3)
    chi = tables.prod(axis=2).sum(axis=1) - tables.prod(axis=1).sum(axis=1)
    hi = int(chi.max())
    return hi, int(chi.min()), int((chi == hi).sum())


@dataclass
class AgreeStats:
    compatible_rate: float | None
    compatible_n: int
    compatible_sigma: float | None
    incompatible_rate: float | None
    incompatible_n: int
    incompatible_sigma: float | None


def recurrence_pairs(sequence):
    """Consecutive occurrences of each cell in the flat measurement stream.

    Yields ``(cell, (t1, s1), (t2, s2), compatible)`` where compatible means
    every operator measured strictly between the two commutes with the cell.
    """
    flat = [(t, s, cell) for t, ctx in enumerate(sequence)
            for s, cell in enumerate(ctx.measured_cells)]
    ops = [PLAN[c // 3][c % 3] for c in range(9)]
    comm = [[ops[a].commutes(ops[b]) for b in range(9)] for a in range(9)]
    last: dict[int, int] = {}
    out = []
    for i, (t, s, cell) in enumerate(flat):
        if cell in last:
            j = last[cell]
            ok = all(comm[cell][flat[m][2]] for m in range(j + 1, i))
            out.append((cell, flat[j][:2], (t, s), ok))
        last[cell] = i
    return out


def p_agree_stats(run: KsbRun) -> dict[str, AgreeStats]:
    """Agreement of repeated measurements of each Pauli, split by compatibility.

    Keys are the plan labels. A class with no recurrences reports None rates.
    """
    acc = {c: {True: [], False: []} for c in range(9)}
    for cell, (t1, s1), (t2, s2), ok in recurrence_pairs(run.sequence):
        acc[cell][ok].append(run.values[:, t1, s1] == run.values[:, t2, s2])
    out = {}
    for cell in range(9):
        row = []
        for ok in (True, False):
            if acc[cell][ok]:
                a = np.concatenate(acc[cell][ok])
                rate = float(a.mean())
                row += [rate, int(a.size), float(np.sqrt(rate * (1 - rate) / a.size))]
            else:
                row += [None, 0, None]
        out[CELL_LABELS[cell]] = AgreeStats(*row)
    return out


def _sq_probs(e):
    return {"X": e / 3, "Y": e / 3, "Z": e / 3}


def _tq_probs(e):
    labels = [a + b for a in "IXYZ" for b in "IXYZ"][1:]
    return {lab: e / 15 for lab in labels}


def _dense_signed_measure(s: dense.DenseState, q: int, w0: float, w1: float):
    """rho -> w0 P0 rho P0 + w1 P1 rho P1 on qubit q (non trace preserving)."""
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    sop = w0 * np.kron(p0, p0) + w1 * np.kron(p1, p1)
    dense.apply_superoperator(s, sop, (q,))


def exact_context_means(sequence, noise: NoiseParams | None = None,
                        initial: str = "00", phase: float | None = None) -> list[float]:
    """Exact E[product] of every context in ``sequence`` (density evolution).

    An unsigned chain carries the unconditional state. When a context starts
    a signed copy branches off; at each of its three measurements the copy is
    weighted by the reported +-1 value, including readout flips, so its
    final trace is the expected product.
    """
    noise = noise if noise is not None else NoiseParams()
    c = build_ksb_circuit(list(sequence), initial, phase)
    meta = {}
    for t, ctx in enumerate(sequence):
        for slot, cell in enumerate(ctx.measured_cells):
            meta[f"t{t}_{slot}"] = (t, slot, PLAN[cell // 3][cell % 3])
    rho = dense.DenseState(3, mixed=True)
    signed = None
    out = []
    unsigned_meas = np.kron(np.diag([1.0, 0]), np.diag([1.0, 0])) + np.kron(
        np.diag([0, 1.0]), np.diag([0, 1.0]))
    for op in c.ops:
        states = [rho] if signed is None else [rho, signed]
        if op.kind == MEASURE:
            t, slot, p = meta[op.key]
            if slot == 0:
                signed = rho.copy()
                states = [rho, signed]
            q = op.targets[0]
            dense.apply_superoperator(rho, unsigned_meas.astype(complex), (q,))
            sign = 1 if p.phase == 0 else -1
            _dense_signed_measure(signed, q, sign * (1 - 2 * noise.e0), -sign * (1 - 2 * noise.e1))
            if slot == 2:
                out.append(float(np.real(np.trace(signed.density))))
                signed = None
            continue
        for st in states:
            if op.kind == RESET:
                dense.reset_dense(st, op.targets[0])
                continue
            dense.apply_gate_dense(st, op.kind, op.targets, op.angle)
            if op.kind == "RZ":
                continue  # virtual rotation, noiseless
            if op.kind in TWO_QUBIT:
                if noise.e_p_2q > 0:
                    dense.apply_pauli_channel(st, op.targets, _tq_probs(noise.e_p_2q))
            elif noise.e_p_sq > 0:
                dense.apply_pauli_channel(st, op.targets, _sq_probs(noise.e_p_sq))
    return out


def exact_chi(sequence, noise=None, initial="00", phase=None) -> float:
    means = exact_context_means(sequence, noise, initial, phase)
    acc = {ctx.label: [] for ctx in CONTEXTS}
    for ctx, m in zip(sequence, means):
        acc[ctx.label].append(m)
    missing = [k for k, v in acc.items() if not v]
    if missing:
        raise ValueError(f"sequence lacks contexts {missing}")
    avg = {k: float(np.mean(v)) for k, v in acc.items()}
    return sum(avg[f"R{i}"] for i in (1, 2, 3)) - sum(avg[f"C{i}"] for i in (1, 2, 3))


def phase_error_sweep(deltas, noise: NoiseParams | None, sequence, initial: str = "00"):
    """chi(delta) for a virtual Z rotation before every final ancilla H.

    The rotation is not Clifford, so each point is evaluated exactly on the
    3-qubit density matrix. Returns a list of ``(delta, chi)``.
    """
    deltas = list(deltas)
    if not deltas:
        raise ValueError("delta grid is empty")
    sequence = list(sequence)
    return [(float(d), exact_chi(sequence, noise, initial, float(d) if d else None))
            for d in deltas]
