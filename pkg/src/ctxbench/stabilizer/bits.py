"""Word-packed bit vectors (little-endian within and across uint64 words)."""

from __future__ import annotations

import numpy as np

WORD = 64


def n_words(n: int) -> int:
    return (n + WORD - 1) // WORD


def pack(bits) -> np.ndarray:
    """Pack a boolean array along its last axis into uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    w = n_words(n)
    padded = np.zeros(bits.shape[:-1] + (w * WORD,), dtype=bool)
    padded[..., :n] = bits
    as_bytes = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view("<u8").astype(np.uint64)


def unpack(words: np.ndarray, n: int) -> np.ndarray:
    words = np.ascontiguousarray(np.asarray(words, dtype=np.uint64)).astype("<u8")
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")
    return bits[..., :n].astype(bool)


def popcount(words: np.ndarray, axis=-1) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=axis, dtype=np.int64)


def locate(q: int) -> tuple[int, np.uint64]:
    """Word index and single-bit mask for qubit ``q``."""
    return q >> 6, np.uint64(1) << np.uint64(q & 63)


def phase_exponent(x1, z1, x2, z2) -> np.ndarray:
    """Power of i picked up when multiplying Pauli rows ``P1 @ P2``.

    Rows use the Hermitian convention (x=z=1 is Y). Each qubit contributes
    +1 for the cyclic pairs XY, YZ, ZX and -1 for XZ, YX, ZY. Broadcasts over
    leading axes; the word axis is the last one.
    """
    a1 = x1 & ~z1
    b1 = x1 & z1
    c1 = ~x1 & z1
    a2 = x2 & ~z2
    b2 = x2 & z2
    c2 = ~x2 & z2
    pos = (a1 & b2) | (b1 & c2) | (c1 & a2)
    neg = (a1 & c2) | (b1 & a2) | (c1 & b2)
    return popcount(pos) - popcount(neg)
