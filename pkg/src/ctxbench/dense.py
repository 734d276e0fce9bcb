"""Small dense statevector / density-matrix simulator used as a ground truth.

Qubit 0 is the most significant bit of a basis index, i.e. the leftmost
character of a bitstring. Pure states are stored as a tensor of shape
``(2,)*n``; mixed states as ``(2,)*2n`` with row axes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stabilizer.circuit import MEASURE, RESET, Circuit
from .stabilizer.pauli import PauliString

MAX_PURE = 14
MAX_MIXED = 10
TOL = 1e-9

_S2 = 1 / np.sqrt(2)
GATES = {
    "H": np.array([[1, 1], [1, -1]], complex) * _S2,
    "S": np.diag([1, 1j]).astype(complex),
    "S_DAG": np.diag([1, -1j]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], complex),
    "Y": np.array([[0, -1j], [1j, 0]], complex),
    "Z": np.diag([1, -1]).astype(complex),
    "SQRT_X": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], complex
    ),
}
PAULI = {"I": np.eye(2, dtype=complex), "X": GATES["X"], "Y": GATES["Y"], "Z": GATES["Z"]}


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def gate_matrix(gate: str, angle: float | None = None) -> np.ndarray:
    if gate == "RZ":
        if angle is None:
            raise ValueError("RZ needs an angle")
        return rz(angle)
    try:
        return GATES[gate]
    except KeyError:
        raise ValueError(f"unknown gate kind {gate!r}") from None


@dataclass
class KrausChannel:
    """Kraus operators acting on ``num_qubits`` (1 or 2) qubits."""

    ops: list[np.ndarray]
    num_qubits: int = field(init=False)

    def __post_init__(self):
        self.ops = [np.asarray(k, complex) for k in self.ops]
        if not self.ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = self.ops[0].shape[0]
        if d not in (2, 4) or any(k.shape != (d, d) for k in self.ops):
            raise ValueError("Kraus operators must be 2x2 or 4x4")
        self.num_qubits = 1 if d == 2 else 2
        total = sum(k.conj().T @ k for k in self.ops)
        if not np.allclose(total, np.eye(d), atol=TOL):
            raise ValueError("Kraus operators are not trace preserving")

    def superoperator(self) -> np.ndarray:
        """Row-major vectorisation: vec(K rho K^+) = (K kron K*) vec(rho)."""
        return sum(np.kron(k, k.conj()) for k in self.ops)


def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return KrausChannel([k0, k1])


def pauli_channel(probs: dict[str, float]) -> KrausChannel:
    """Channel applying Pauli label ``P`` with probability ``probs[P]``.

    Labels are 1- or 2-character strings; identity takes the remainder.
    """
    k = len(next(iter(probs)))
    rest = 1.0 - sum(probs.values())
    if rest < -TOL:
        raise ValueError("Pauli probabilities exceed 1")
    ops = [np.sqrt(max(rest, 0.0)) * np.eye(2**k)]
    for label, p in probs.items():
        m = np.array([[1.0 + 0j]])
        for ch in label:
            m = np.kron(m, PAULI[ch])
        ops.append(np.sqrt(p) * m)
    return KrausChannel(ops)


class DenseState:
    __slots__ = ("num_qubits", "data", "mixed")

    def __init__(self, num_qubits: int, mixed: bool = False):
        limit = MAX_MIXED if mixed else MAX_PURE
        if not 1 <= num_qubits <= limit:
            kind = "mixed" if mixed else "pure"
            raise ValueError(f"{kind} dense state limited to 1..{limit} qubits")
        self.num_qubits = num_qubits
        self.mixed = mixed
        shape = (2,) * (2 * num_qubits if mixed else num_qubits)
        self.data = np.zeros(shape, complex)
        self.data[(0,) * len(shape)] = 1.0

    @classmethod
    def from_vector(cls, vec) -> "DenseState":
        vec = np.asarray(vec, complex).ravel()
        n = int(round(np.log2(vec.size)))
        if 2**n != vec.size:
            raise ValueError("vector length must be a power of two")
        s = cls(n)
        s.data = vec.reshape((2,) * n).copy()
        return s

    @classmethod
    def from_density(cls, rho) -> "DenseState":
        rho = np.asarray(rho, complex)
        n = int(round(np.log2(rho.shape[0])))
        if rho.shape != (2**n, 2**n):
            raise ValueError("density matrix must be square with power-of-two size")
        s = cls(n, mixed=True)
        s.data = rho.reshape((2,) * (2 * n)).copy()
        return s

    @classmethod
    def ghz(cls, n: int, mixed: bool = False) -> "DenseState":
        v = np.zeros(2**n, complex)
        v[0] = v[-1] = _S2
        s = cls.from_vector(v)
        return s.to_mixed() if mixed else s

    def copy(self) -> "DenseState":
        s = DenseState.__new__(DenseState)
        s.num_qubits, s.mixed, s.data = self.num_qubits, self.mixed, self.data.copy()
        return s

    @property
    def vector(self) -> np.ndarray:
        if self.mixed:
            raise ValueError("mixed state has no state vector")
        return self.data.reshape(-1)

    @property
    def density(self) -> np.ndarray:
        d = 2**self.num_qubits
        if self.mixed:
            return self.data.reshape(d, d)
        v = self.vector
        return np.outer(v, v.conj())

    def to_mixed(self) -> "DenseState":
        if self.mixed:
            return self.copy()
        rho = self.density
        return DenseState.from_density(rho)

    def probabilities(self) -> np.ndarray:
        """Z-basis outcome probabilities indexed by basis integer."""
        if self.mixed:
            p = np.real(np.diagonal(self.density)).copy()
        else:
            p = np.abs(self.vector) ** 2
        p[p < 0] = 0.0
        return p / p.sum()

    def trace(self) -> float:
        if self.mixed:
            return float(np.real(np.trace(self.density)))
        return float(np.vdot(self.vector, self.vector).real)

    def check(self, tol: float = TOL) -> None:
        if abs(self.trace() - 1.0) > tol:
            raise AssertionError(f"trace deviates from 1 by {abs(self.trace() - 1)}")
        if self.mixed:
            rho = self.density
            if not np.allclose(rho, rho.conj().T, atol=tol):
                raise AssertionError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(rho).min() < -tol:
                raise AssertionError("density matrix is not positive semidefinite")

    def _check_targets(self, targets):
        for q in targets:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if len(set(targets)) != len(targets):
            raise ValueError("targets must be distinct")


def _contract(tensor: np.ndarray, op: np.ndarray, axes) -> np.ndarray:
    """Apply ``op`` (2^k x 2^k) to tensor ``axes`` (k of them), in order."""
    k = len(axes)
    op = op.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_unitary(s: DenseState, u: np.ndarray, targets) -> None:
    targets = list(targets)
    s.data = _contract(s.data, u, targets)
    if s.mixed:
        n = s.num_qubits
        s.data = _contract(s.data, u.conj(), [n + q for q in targets])


def apply_gate_dense(s: DenseState, gate: str, targets, angle: float | None = None) -> DenseState:
    """Apply a vocabulary gate in place (CNOT targets are control, target)."""
    if isinstance(targets, int):
        targets = (targets,)
    targets = tuple(targets)
    u = gate_matrix(gate, angle)
    if u.shape[0] != 2 ** len(targets):
        raise ValueError(f"{gate} takes {int(np.log2(u.shape[0]))} target(s)")
    s._check_targets(targets)
    _apply_unitary(s, u, targets)
    return s


def _as_mixed(s: DenseState) -> None:
    if not s.mixed:
        if s.num_qubits > MAX_MIXED:
            raise ValueError(f"mixed evolution limited to {MAX_MIXED} qubits")
        m = s.to_mixed()
        s.mixed, s.data = True, m.data


def apply_superoperator(s: DenseState, sop: np.ndarray, targets) -> DenseState:
    """Apply a row-major superoperator on 1 or 2 target qubits."""
    targets = tuple(targets)
    s._check_targets(targets)
    _as_mixed(s)
    n, k = s.num_qubits, len(targets)
    sop = sop.reshape((2,) * (4 * k))
    axes = list(targets) + [n + q for q in targets]
    out = np.tensordot(sop, s.data, axes=(list(range(2 * k, 4 * k)), axes))
    s.data = np.moveaxis(out, list(range(2 * k)), axes)
    return s


def apply_kraus(s: DenseState, channel: KrausChannel, targets) -> DenseState:
    if isinstance(targets, int):
        targets = (targets,)
    if len(targets) != channel.num_qubits:
        raise ValueError("channel arity does not match targets")
    return apply_superoperator(s, channel.superoperator(), targets)


def apply_amplitude_damping(s: DenseState, q: int, gamma: float) -> DenseState:
    return apply_kraus(s, amplitude_damping(gamma), (q,))


def apply_pauli_channel(s: DenseState, targets, probs: dict[str, float]) -> DenseState:
    if isinstance(targets, int):
        targets = (targets,)
    return apply_kraus(s, pauli_channel(probs), targets)


def dd_cycle_superoperator(gamma: float) -> np.ndarray:
    """One AD - Y - AD - Y cycle with instantaneous Y pulses."""
    ad = amplitude_damping(gamma).superoperator()
    y = GATES["Y"]
    ys = np.kron(y, y.conj())
    return ys @ ad @ ys @ ad


def apply_dd_idle(s: DenseState, q: int, t: float, T1: float, dt: float | None = None) -> DenseState:
    """Idle qubit ``q`` for ``t`` under repeated DD cycles of length ``dt``.

    Each half cycle damps with gamma = dt / (2 T1). The cycle count is
    ``round(t/dt)`` and dt is rescaled so the cycles cover ``t`` exactly.
    """
    if T1 <= 0:
        raise ValueError("T1 must be positive")
    if t < 0:
        raise ValueError("idle time must be nonnegative")
    if dt is None:
        dt = T1 / 1000
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t == 0:
        return s
    cycles = max(1, int(round(t / dt)))
    step = t / cycles
    sop = np.linalg.matrix_power(dd_cycle_superoperator(step / (2 * T1)), cycles)
    return apply_superoperator(s, sop, (q,))


def reset_dense(s: DenseState, q: int) -> DenseState:
    """Deterministic reset channel to |0> on qubit ``q``."""
    ch = KrausChannel([np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])])
    return apply_kraus(s, ch, (q,))


def measure_dense(s: DenseState, q: int, rng: np.random.Generator) -> int:
    """Projective Z measurement with collapse."""
    s._check_targets((q,))
    n = s.num_qubits
    idx0 = [slice(None)] * s.data.ndim
    idx0[q] = 0
    if s.mixed:
        idx0[n + q] = 0
        p0 = float(np.real(np.einsum(_trace_spec(n, q), s.data[tuple(idx0)])))
    else:
        p0 = float(np.sum(np.abs(s.data[tuple(idx0)]) ** 2))
    bit = int(rng.random() >= p0)
    keep = p0 if bit == 0 else 1.0 - p0
    proj = np.diag([1.0, 0.0]) if bit == 0 else np.diag([0.0, 1.0])
    _apply_unitary(s, proj.astype(complex), (q,))
    s.data /= keep if s.mixed else np.sqrt(keep)
    return bit


def _trace_spec(n: int, q: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rest = [i for i in range(n) if i != q]
    row = "".join(letters[i] for i in rest)
    return row + row + "->"


def pauli_expectation_dense(s: DenseState, p: PauliString | str) -> float:
    if isinstance(p, str):
        p = PauliString.from_label(p)
    if p.num_qubits != s.num_qubits:
        raise ValueError("Pauli size does not match state")
    work = s.copy()
    for q in range(s.num_qubits):
        ch = p[q]
        if ch != "I":
            work.data = _contract(work.data, PAULI[ch], [q])
    val = np.trace(work.density if work.mixed else np.outer(work.vector, s.vector.conj()))
    return float(np.real(p.sign * val))


def partial_trace(s: DenseState, keep) -> DenseState:
    keep = sorted(keep)
    s._check_targets(tuple(keep))
    n = s.num_qubits
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rho = s.to_mixed().data if not s.mixed else s.data
    rows = [letters[i] for i in range(n)]
    cols = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = "".join(letters[i] for i in keep) + "".join(letters[n + i] for i in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho)
    d = 2 ** len(keep)
    return DenseState.from_density(red.reshape(d, d))


def fidelity_to_ghz(s: DenseState) -> float:
    n = s.num_qubits
    ghz = DenseState.ghz(n).vector
    if s.mixed:
        f = np.vdot(ghz, s.density @ ghz)
    else:
        f = abs(np.vdot(ghz, s.vector)) ** 2
    return float(min(1.0, max(0.0, np.real(f))))


def sample_measurement_dense(s: DenseState, rng: np.random.Generator, shots: int | None = None):
    """Sample Z-basis bitstrings (qubit 0 first) without collapsing ``s``."""
    p = s.probabilities()
    count = 1 if shots is None else shots
    idx = rng.choice(p.size, size=count, p=p)
    bits = (idx[:, None] >> np.arange(s.num_qubits - 1, -1, -1)) & 1
    bits = bits.astype(np.uint8)
    return bits[0] if shots is None else bits


def terminal_distribution(circuit: Circuit) -> dict[str, float]:
    """Exact distribution of the measured keys for a circuit whose
    measurements all come after its last gate on each measured qubit and
    that contains no resets. Keys map to bitstrings in ``measurement_keys``
    order."""
    n = circuit.num_qubits
    s = DenseState(n)
    measured: list[int] = []
    for op in circuit.ops:
        if op.kind == RESET:
            raise ValueError("terminal_distribution does not handle resets")
        if op.kind == MEASURE:
            measured.append(op.targets[0])
            continue
        if any(q in measured for q in op.targets):
            raise ValueError("gate after measurement on the same qubit")
        apply_gate_dense(s, op.kind, op.targets, op.angle)
    if len(set(measured)) != len(measured):
        raise ValueError("qubit measured twice")
    p = s.probabilities().reshape((2,) * n)
    others = tuple(i for i in range(n) if i not in measured)
    marg = p.sum(axis=others) if others else p
    # axes remaining are sorted qubit order; reorder to measurement order
    order = sorted(measured)
    marg = np.transpose(marg, [order.index(q) for q in measured]) if measured else marg
    out = {}
    for idx in np.ndindex(*marg.shape):
        if marg[idx] > 1e-15:
            out["".join(map(str, idx))] = float(marg[idx])
    return out


def run_dense(circuit: Circuit, rng: np.random.Generator, mixed: bool = False):
    """One shot of ``circuit`` on the dense simulator. Returns (state, bits)."""
    s = DenseState(circuit.num_qubits, mixed=mixed)
    bits = {}
    for op in circuit.ops:
        if op.kind == MEASURE:
            bits[op.key] = measure_dense(s, op.targets[0], rng)
        elif op.kind == RESET:
            if measure_dense(s, op.targets[0], rng):
                apply_gate_dense(s, "X", op.targets)
        else:
            apply_gate_dense(s, op.kind, op.targets, op.angle)
    return s, bits
