"""Find short Clifford rotations that map commuting Paulis onto Z-type strings.

Measuring ``U P U^dagger`` in the Z basis after applying ``U`` measures ``P``.
The search is breadth-first over the fixed gate vocabulary, so the returned
circuit is a shortest one (ties broken by vocabulary order).
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from itertools import permutations

import numpy as np

from .pauli import PauliString

SEARCH_1Q = ("H", "S", "SQRT_X")
SEARCH_2Q = ("CNOT", "CZ")


def _moves(k: int):
    out = [(g, (q,)) for q in range(k) for g in SEARCH_1Q]
    for a, b in permutations(range(k), 2):
        out.append(("CNOT", (a, b)))
        if a < b:
            out.append(("CZ", (a, b)))
    return out


def _key(paulis) -> tuple:
    return tuple((p.xs.tobytes(), p.zs.tobytes()) for p in paulis)


@lru_cache(maxsize=None)
def _search(labels: tuple[str, ...], max_depth: int):
    paulis = [PauliString.from_label(s) for s in labels]
    k = paulis[0].num_qubits
    moves = _moves(k)
    start = tuple(paulis)
    seen = {_key(start)}
    queue = deque([(start, ())])
    while queue:
        cur, path = queue.popleft()
        if all(not p.xs.any() for p in cur):
            return path, tuple(str(p) for p in cur)
        if len(path) >= max_depth:
            continue
        for gate, targets in moves:
            nxt = tuple(p.conjugated(gate, targets) for p in cur)
            key = _key(nxt)
            if key in seen:
                continue
            seen.add(key)
            queue.append((nxt, path + ((gate, targets),)))
    raise ValueError(f"no diagonalizing circuit of depth <= {max_depth} for {labels}")


def diagonalize(paulis, max_depth: int = 8):
    """Return ``(gates, images)`` for pairwise commuting ``paulis``.

    ``gates`` is a list of ``(kind, targets)`` on local qubit indices and
    ``images[i]`` is the signed Z-type PauliString that ``paulis[i]`` maps to.
    """
    paulis = list(paulis)
    if not paulis:
        raise ValueError("need at least one Pauli")
    for i, a in enumerate(paulis):
        for b in paulis[i + 1:]:
            if not a.commutes(b):
                raise ValueError(f"{a} and {b} do not commute")
    path, images = _search(tuple(str(p) for p in paulis), max_depth)
    return list(path), [PauliString.from_label(s) for s in images]


def append_controlled_pauli(circuit, control: int, pauli: PauliString, data) -> None:
    """Append controlled-``pauli`` (sign ignored) from ``control`` onto ``data``.

    Controlled-X is CNOT, controlled-Z is CZ and controlled-Y is CNOT
    conjugated by S on the target.
    """
    data = list(data)
    if len(data) != pauli.num_qubits:
        raise ValueError("need one data qubit per Pauli factor")
    if control in data:
        raise ValueError("control qubit overlaps the data qubits")
    for q, d in enumerate(data):
        ch = pauli[q]
        if ch == "X":
            circuit.append("CNOT", control, d)
        elif ch == "Z":
            circuit.append("CZ", control, d)
        elif ch == "Y":
            circuit.append("S_DAG", d)
            circuit.append("CNOT", control, d)
            circuit.append("S", d)


def z_readout_value(image: PauliString, bits) -> np.ndarray:
    """Eigenvalue of a signed Z-type ``image`` given measured ``bits``.

    ``bits`` has shape ``(..., k)`` with one column per qubit of ``image``.
    """
    if image.xs.any():
        raise ValueError(f"{image} is not Z-type")
    support = image.z_bits
    bits = np.asarray(bits)
    parity = bits[..., support].sum(axis=-1) & 1
    sign = 1 if image.phase == 0 else -1
    return sign * (1 - 2 * parity.astype(np.int64))
