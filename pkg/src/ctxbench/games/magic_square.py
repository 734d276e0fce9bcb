"""Mermin-Peres magic square game on two shared Bell pairs.

Alice holds qubits 0 and 1, Bob qubits 2 and 3; Bell pairs sit on (0, 2)
and (1, 3). In the measurement plan the first Pauli of each cell acts on a
player's first qubit. Rows and columns are indexed 1..3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from ..noise import NoiseParams, sample_circuit
from ..stats import binomial_sigma
from ..stabilizer.circuit import Circuit
from ..stabilizer.compile import append_controlled_pauli, diagonalize, z_readout_value
from ..stabilizer.pauli import PauliString

PLAN_LABELS = (
    ("IZ", "ZI", "ZZ"),
    ("XI", "IX", "XX"),
    ("-XZ", "-ZX", "YY"),
)
PLAN = tuple(tuple(PauliString.from_label(s) for s in row) for row in PLAN_LABELS)
ROW_PRODUCT = +1
COL_PRODUCT = -1

ALICE = (0, 1)
BOB = (2, 3)
ALICE_ANCILLAS = (4, 5)
BOB_ANCILLAS = (6, 7)
VARIATIONS = (1, 2)
RULES = ("strict", "intersection")


def row_ops(j: int) -> list[PauliString]:
    _check_index(j)
    return list(PLAN[j - 1])


def col_ops(k: int) -> list[PauliString]:
    _check_index(k)
    return [PLAN[r][k - 1] for r in range(3)]


def _check_index(i: int):
    if i not in (1, 2, 3):
        raise ValueError(f"row/column index must be 1, 2 or 3, got {i}")


def line_product(ops) -> PauliString:
    out = ops[0]
    for p in ops[1:]:
        out = out * p
    return out


@dataclass
class MagicSquareGameRecord:
    """Shots of one (row j, column k) game.

    ``alice[s]`` and ``bob[s]`` are the +-1 triples of shot ``s``; in variation
    1 the third entry is inferred, in variation 2 all three are measured.
    """

    j: int
    k: int
    alice: np.ndarray
    bob: np.ndarray
    win: np.ndarray
    variation: int

    @property
    def shots(self) -> int:
        return int(self.win.size)

    @property
    def wins(self) -> int:
        return int(self.win.sum())

    @property
    def win_rate(self) -> float:
        return float(self.win.mean())

    @property
    def sigma(self) -> float:
        return binomial_sigma(self.win_rate, self.shots)


def bell_pairs_circuit() -> Circuit:
    c = Circuit(4)
    for a, b in zip(ALICE, BOB):
        c.append("H", a)
        c.append("CNOT", a, b)
    return c


def _append_local(c: Circuit, gates, qubits):
    for kind, targets in gates:
        c.append(kind, *(qubits[t] for t in targets))


def variation_1_circuit(j: int, k: int):
    """Circuit plus, per player, the Z-type images of the two measured operators."""
    a_ops, b_ops = row_ops(j)[:2], col_ops(k)[:2]
    c = bell_pairs_circuit()
    a_gates, a_img = diagonalize(a_ops)
    b_gates, b_img = diagonalize(b_ops)
    _append_local(c, a_gates, ALICE)
    _append_local(c, b_gates, BOB)
    for i, q in enumerate(ALICE):
        c.append("MEASURE_Z", q, key=f"a{i}")
    for i, q in enumerate(BOB):
        c.append("MEASURE_Z", q, key=f"b{i}")
    return c, a_img, b_img


def score_variation_1(j: int, k: int, bits: np.ndarray, a_img, b_img):
    """Triples and wins from raw 4-bit records (columns a0, a1, b0, b1)."""
    bits = np.atleast_2d(bits)
    a = np.stack([z_readout_value(p, bits[:, 0:2]) for p in a_img], axis=1)
    b = np.stack([z_readout_value(p, bits[:, 2:4]) for p in b_img], axis=1)
    alice = np.column_stack([a, ROW_PRODUCT * a[:, 0] * a[:, 1]])
    bob = np.column_stack([b, COL_PRODUCT * b[:, 0] * b[:, 1]])
    win = alice[:, k - 1] == bob[:, j - 1]
    return alice, bob, win


def play_variation_1(j: int, k: int, noise: NoiseParams | None,
                     rng: np.random.Generator, shots: int = 1) -> MagicSquareGameRecord:
    """Measure the first two operators of each player's line, infer the third."""
    c, a_img, b_img = variation_1_circuit(j, k)
    s = sample_circuit(c, noise, shots, rng)
    bits = s.get_many(["a0", "a1", "b0", "b1"])
    alice, bob, win = score_variation_1(j, k, bits, a_img, b_img)
    return MagicSquareGameRecord(j, k, alice, bob, win, 1)


def _append_player_v2(c: Circuit, ops, data, ancillas, tag: str):
    """Two QND measurements via ancillas, then the third directly on data."""
    for anc in ancillas:
        c.append("H", anc)
    for op, anc in zip(ops[:2], ancillas):
        append_controlled_pauli(c, anc, op, data)
    for i, anc in enumerate(ancillas):
        c.append("H", anc)
        c.append("MEASURE_Z", anc, key=f"{tag}{i}")
    gates, (img,) = diagonalize([ops[2]])
    _append_local(c, gates, data)
    for i, q in enumerate(data):
        c.append("MEASURE_Z", q, key=f"{tag}d{i}")
    return img


def variation_2_circuit(j: int, k: int):
    c = Circuit(8)
    c.extend(bell_pairs_circuit())
    a_img = _append_player_v2(c, row_ops(j), ALICE, ALICE_ANCILLAS, "a")
    b_img = _append_player_v2(c, col_ops(k), BOB, BOB_ANCILLAS, "b")
    return c, a_img, b_img


V2_KEYS = ["a0", "a1", "ad0", "ad1", "b0", "b1", "bd0", "bd1"]


def score_variation_2(j: int, k: int, bits: np.ndarray, a_img, b_img, rule: str = "strict"):
    """Raw triples and wins from records ordered as ``V2_KEYS``.

    ``rule="strict"`` loses a shot whenever a player's triple breaks their
    product rule; ``"intersection"`` only compares the shared cell.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    bits = np.atleast_2d(bits)
    ra, rb = row_ops(j), col_ops(k)

    def triple(ops, anc_bits, img, data_bits):
        q = [(1 - 2 * anc_bits[:, i].astype(np.int64)) * (1 if ops[i].phase == 0 else -1)
             for i in range(2)]
        return np.column_stack(q + [z_readout_value(img, data_bits)])

    alice = triple(ra, bits[:, 0:2], a_img, bits[:, 2:4])
    bob = triple(rb, bits[:, 4:6], b_img, bits[:, 6:8])
    win = alice[:, k - 1] == bob[:, j - 1]
    if rule == "strict":
        win &= alice.prod(axis=1) == ROW_PRODUCT
        win &= bob.prod(axis=1) == COL_PRODUCT
    return alice, bob, win


def play_variation_2(j: int, k: int, noise: NoiseParams | None,
                     rng: np.random.Generator, shots: int = 1,
                     rule: str = "strict") -> MagicSquareGameRecord:
    """Measure all three operators: two by ancilla QND, one on the data."""
    c, a_img, b_img = variation_2_circuit(j, k)
    s = sample_circuit(c, noise, shots, rng)
    alice, bob, win = score_variation_2(j, k, s.get_many(V2_KEYS), a_img, b_img, rule)
    return MagicSquareGameRecord(j, k, alice, bob, win, 2)


def play(variation: int, j: int, k: int, noise, rng, shots: int = 1, **kw) -> MagicSquareGameRecord:
    if variation == 1:
        return play_variation_1(j, k, noise, rng, shots)
    if variation == 2:
        return play_variation_2(j, k, noise, rng, shots, **kw)
    raise ValueError(f"variation must be 1 or 2, got {variation}")


def play_all_games(variation: int, noise, shots: int, rng) -> list[MagicSquareGameRecord]:
    return [play(variation, j, k, noise, rng, shots) for j in (1, 2, 3) for k in (1, 2, 3)]


def _line_strategies(parity: int) -> np.ndarray:
    return np.array([t for t in product((1, -1), repeat=3) if np.prod(t) == parity])


def optimal_classical_strategy():
    """Exhaustive search over deterministic strategy pairs.

    Alice fixes a +1-product triple per row (64 tables), Bob a -1-product
    triple per column (64 tables). Returns ``(value, (alice, bob), count)``
    with ``value`` the best average win over the 9 uniform games as a
    Fraction, one optimal pair of 3x3 tables and the number of optimal pairs.
    """
    rows = _line_strategies(ROW_PRODUCT)
    cols = _line_strategies(COL_PRODUCT)
    alice = np.array([np.stack(ch) for ch in product(rows, repeat=3)])  # [s, j, :]
    bob = np.array([np.stack(ch, axis=1) for ch in product(cols, repeat=3)])  # [t, :, k]
    agree = alice.reshape(len(alice), 9) @ bob.reshape(len(bob), 9).T
    wins = (9 + agree) // 2
    best = int(wins.max())
    s, t = np.unravel_index(int(np.argmax(wins)), wins.shape)
    return Fraction(best, 9), (alice[s], bob[t]), int((wins == best).sum())


MECHANISM_LABELS = {"sq": "SQ", "2q": "2Q", "readout": "readout", "all": "all"}


def error_budget(variation: int, noise: NoiseParams, shots: int,
                 rng: np.random.Generator, mechanisms=("sq", "2q", "readout")):
    """Average loss over the 9 games with one mechanism on at a time, then all.

    Returns a list of dicts with keys mechanism, loss, sigma.
    """
    rows = []
    for mech in list(mechanisms) + ["all"]:
        p = noise.only(mech)
        games = play_all_games(variation, p, shots, rng)
        loss = 1.0 - float(np.mean([g.win_rate for g in games]))
        sigma = binomial_sigma(loss, shots * len(games))
        rows.append({"mechanism": mech, "loss": loss, "sigma": sigma})
    return rows
