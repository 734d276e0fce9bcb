"""Signed n-qubit Pauli operators stored as packed x/z bit rows."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from . import rules
from .bits import n_words, pack, phase_exponent, popcount, unpack

_SIGNS = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_CHAR = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"I": (0, 0), "_": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class PauliString:
    """``i**phase`` times a tensor product of I/X/Y/Z.

    Qubit 0 is the leftmost character of the label. The x=z=1 pattern denotes
    Y itself (not XZ), so a PauliString with even ``phase`` is Hermitian.
    """

    __slots__ = ("num_qubits", "xs", "zs", "phase")

    def __init__(self, num_qubits: int, xs=None, zs=None, phase: int = 0):
        if num_qubits < 1:
            raise ValueError("a PauliString needs at least one qubit")
        w = n_words(num_qubits)
        self.num_qubits = num_qubits
        self.xs = np.zeros(w, np.uint64) if xs is None else np.array(xs, np.uint64)
        self.zs = np.zeros(w, np.uint64) if zs is None else np.array(zs, np.uint64)
        if self.xs.shape != (w,) or self.zs.shape != (w,):
            raise ValueError("x and z rows must match num_qubits")
        self.phase = int(phase) % 4

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels like ``"XYZ"``, ``"-XZ"``, ``"+iYY"``, ``"-i_X"``."""
        s = label.strip()
        phase = 0
        if s.startswith("-"):
            phase, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        if s.startswith("i"):
            phase, s = phase + 1, s[1:]
        if not s:
            raise ValueError(f"empty Pauli label {label!r}")
        try:
            bits = [_BITS[ch] for ch in s.upper()]
        except KeyError as exc:
            raise ValueError(f"bad Pauli label {label!r}") from exc
        xb = [b[0] for b in bits]
        zb = [b[1] for b in bits]
        return cls(len(bits), pack(xb), pack(zb), phase)

    @classmethod
    def from_bits(cls, x_bits, z_bits, phase: int = 0) -> "PauliString":
        x_bits = np.asarray(x_bits, dtype=bool)
        z_bits = np.asarray(z_bits, dtype=bool)
        if x_bits.shape != z_bits.shape:
            raise ValueError("x_bits and z_bits must have identical length")
        return cls(len(x_bits), pack(x_bits), pack(z_bits), phase)

    @classmethod
    def sparse(cls, num_qubits: int, ops: Mapping[int, str], sign: int = 1) -> "PauliString":
        """Build from ``{qubit: 'X'|'Y'|'Z'}``; ``sign`` is +1 or -1."""
        xb = np.zeros(num_qubits, bool)
        zb = np.zeros(num_qubits, bool)
        for q, ch in ops.items():
            if not 0 <= q < num_qubits:
                raise ValueError(f"qubit {q} out of range")
            xb[q], zb[q] = _BITS[ch.upper()]
        return cls.from_bits(xb, zb, 0 if sign > 0 else 2)

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits)

    @property
    def x_bits(self) -> np.ndarray:
        return unpack(self.xs, self.num_qubits)

    @property
    def z_bits(self) -> np.ndarray:
        return unpack(self.zs, self.num_qubits)

    @property
    def sign(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase]

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def weight(self) -> int:
        return int(popcount(self.xs | self.zs))

    def __getitem__(self, q: int) -> str:
        xb, zb = self.x_bits, self.z_bits
        return _CHAR[(int(xb[q]), int(zb[q]))]

    def copy(self) -> "PauliString":
        return PauliString(self.num_qubits, self.xs, self.zs, self.phase)

    def _check(self, other: "PauliString"):
        if other.num_qubits != self.num_qubits:
            raise ValueError(
                f"size mismatch: {self.num_qubits} vs {other.num_qubits} qubits"
            )

    def __mul__(self, other: "PauliString") -> "PauliString":
        self._check(other)
        g = int(phase_exponent(self.xs, self.zs, other.xs, other.zs))
        return PauliString(
            self.num_qubits,
            self.xs ^ other.xs,
            self.zs ^ other.zs,
            self.phase + other.phase + g,
        )

    def __neg__(self) -> "PauliString":
        return PauliString(self.num_qubits, self.xs, self.zs, self.phase + 2)

    def commutes(self, other: "PauliString") -> bool:
        self._check(other)
        return int(popcount((self.xs & other.zs) ^ (self.zs & other.xs))) % 2 == 0

    def equal_up_to_phase(self, other: "PauliString") -> bool:
        self._check(other)
        return bool(np.array_equal(self.xs, other.xs) and np.array_equal(self.zs, other.zs))

    def is_identity(self) -> bool:
        return not (self.xs.any() or self.zs.any())

    def conjugated(self, gate: str, targets: Iterable[int]) -> "PauliString":
        """Return ``U P U^dagger`` for a Clifford gate ``U``."""
        targets = tuple(targets)
        for t in targets:
            if not 0 <= t < self.num_qubits:
                raise ValueError(f"target {t} out of range")
        x = self.xs[None, :].copy()
        z = self.zs[None, :].copy()
        flip = rules.conjugate(gate, x, z, targets)
        return PauliString(self.num_qubits, x[0], z[0], self.phase + 2 * int(flip[0]))

    def on_qubits(self, qubits: Iterable[int], num_qubits: int) -> "PauliString":
        """Embed this operator into a larger register at ``qubits``."""
        qubits = list(qubits)
        if len(qubits) != self.num_qubits:
            raise ValueError("need one target qubit per Pauli factor")
        xb = np.zeros(num_qubits, bool)
        zb = np.zeros(num_qubits, bool)
        xb[qubits] = self.x_bits
        zb[qubits] = self.z_bits
        return PauliString.from_bits(xb, zb, self.phase)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.phase == other.phase
            and self.equal_up_to_phase(other)
        )

    def __hash__(self) -> int:
        return hash((self.num_qubits, self.phase, self.xs.tobytes(), self.zs.tobytes()))

    def __str__(self) -> str:
        xb, zb = self.x_bits, self.z_bits
        body = "".join(_CHAR[(int(a), int(b))] for a, b in zip(xb, zb))
        return _SIGNS[self.phase] + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"
