"""Moment-scheduled circuits over a fixed gate vocabulary."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .rules import ONE_QUBIT, TWO_QUBIT

MEASURE = "MEASURE_Z"
RESET = "RESET"
# Only the dense simulator executes RZ; the tableau paths reject it.
NON_CLIFFORD = ("RZ",)
GATE_KINDS = ONE_QUBIT + TWO_QUBIT + (MEASURE, RESET) + NON_CLIFFORD


@dataclass(frozen=True)
class Op:
    kind: str
    targets: tuple[int, ...]
    moment: int
    key: str | None = None
    angle: float | None = None

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT

    @property
    def is_single_qubit_gate(self) -> bool:
        return self.kind in ONE_QUBIT


@dataclass
class MeasurementRecord:
    """Measured bits of one shot, keyed by the MEASURE_Z record key."""

    bits: dict[str, int] = field(default_factory=dict)
    shot: int = 0

    def __getitem__(self, key: str) -> int:
        return self.bits[key]

    def __len__(self) -> int:
        return len(self.bits)


class Circuit:
    """Ordered ops with moment indices.

    ``append`` schedules as soon as possible unless a moment is given; a
    qubit's moments strictly increase along the op list, so no moment touches
    a qubit twice.
    """

    def __init__(self, num_qubits: int):
        if num_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        self.num_qubits = num_qubits
        self.ops: list[Op] = []
        self._last = [-1] * num_qubits
        self._keys: set[str] = set()

    def append(self, kind: str, *targets: int, key: str | None = None,
               moment: int | None = None, angle: float | None = None) -> Op:
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {kind!r}")
        arity = 2 if kind in TWO_QUBIT else 1
        if len(targets) != arity:
            raise ValueError(f"{kind} takes {arity} target(s), got {len(targets)}")
        for t in targets:
            if not isinstance(t, (int,)) and not hasattr(t, "__index__"):
                raise TypeError(f"target {t!r} is not an integer")
            if not 0 <= t < self.num_qubits:
                raise ValueError(f"target {t} out of range for {self.num_qubits} qubits")
        targets = tuple(int(t) for t in targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"{kind} targets must be distinct, got {targets}")
        if kind == MEASURE:
            if key is None:
                key = f"m{len(self._keys)}"
            if key in self._keys:
                raise ValueError(f"duplicate measurement key {key!r}")
        elif key is not None:
            raise ValueError("only MEASURE_Z takes a record key")
        if kind in NON_CLIFFORD and angle is None:
            raise ValueError(f"{kind} needs an angle")
        earliest = max(self._last[t] for t in targets) + 1
        if moment is None:
            moment = earliest
        elif moment < earliest:
            raise ValueError(
                f"moment {moment} conflicts with earlier ops on qubits {targets}"
            )
        op = Op(kind, targets, moment, key, None if angle is None else float(angle))
        for t in targets:
            self._last[t] = moment
        if key is not None:
            self._keys.add(key)
        self.ops.append(op)
        return op

    def extend(self, other: "Circuit", offset: int | None = None) -> None:
        """Append ``other``'s ops, keeping their relative moment structure.

        Without ``offset`` the fragment starts right after the last op on any
        of the qubits it touches.
        """
        if other.num_qubits > self.num_qubits:
            raise ValueError("fragment uses more qubits than the circuit")
        if not other.ops:
            return
        first = min(op.moment for op in other.ops)
        if offset is None:
            # earliest shift keeping each fragment op after this circuit's ops
            offset = 0
            for op in other.ops:
                need = max(self._last[t] for t in op.targets) + 1
                offset = max(offset, need - (op.moment - first))
        for op in other.ops:
            self.append(op.kind, *op.targets, key=op.key,
                        moment=op.moment - first + offset, angle=op.angle)

    def copy(self) -> "Circuit":
        c = Circuit(self.num_qubits)
        c.ops = list(self.ops)
        c._last = list(self._last)
        c._keys = set(self._keys)
        return c

    def __iter__(self) -> Iterator[Op]:
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def depth(self) -> int:
        return max((op.moment for op in self.ops), default=-1) + 1

    def moments(self) -> list[list[Op]]:
        out: list[list[Op]] = [[] for _ in range(self.depth)]
        for op in self.ops:
            out[op.moment].append(op)
        return out

    @property
    def two_qubit_depth(self) -> int:
        return len({op.moment for op in self.ops if op.is_two_qubit})

    def count(self, kinds: Iterable[str] | str) -> int:
        if isinstance(kinds, str):
            kinds = (kinds,)
        kinds = set(kinds)
        return sum(op.kind in kinds for op in self.ops)

    @property
    def n_single_qubit_gates(self) -> int:
        return sum(op.is_single_qubit_gate for op in self.ops)

    @property
    def n_two_qubit_gates(self) -> int:
        return sum(op.is_two_qubit for op in self.ops)

    @property
    def measurement_keys(self) -> list[str]:
        return [op.key for op in self.ops if op.kind == MEASURE]

    @property
    def is_clifford(self) -> bool:
        return all(op.kind not in NON_CLIFFORD for op in self.ops)

    def __repr__(self) -> str:
        return f"Circuit(num_qubits={self.num_qubits}, ops={len(self.ops)}, depth={self.depth})"


def random_clifford_circuit(n: int, n_gates: int, rng, measure: bool = True) -> Circuit:
    """Uniformly chosen gates from the vocabulary, then Z measurement of all
    qubits (keys ``q0..q{n-1}``) when ``measure`` is set."""
    c = Circuit(n)
    kinds = ONE_QUBIT + (TWO_QUBIT if n > 1 else ())
    for _ in range(n_gates):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in TWO_QUBIT:
            a, b = rng.choice(n, size=2, replace=False)
            c.append(kind, int(a), int(b))
        else:
            c.append(kind, int(rng.integers(n)))
    if measure:
        for q in range(n):
            c.append(MEASURE, q, key=f"q{q}")
    return c
