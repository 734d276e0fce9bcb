"""Dense GF(2) linear algebra on uint8 bit matrices."""

from __future__ import annotations

import numpy as np


def _as_bits(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("expected a 2D bit matrix")
    return (a.astype(np.uint8) & 1).copy()


def row_reduce(a):
    """Reduced row echelon form over GF(2).

    Returns ``(r, pivots)`` where ``r`` is the reduced matrix and ``pivots``
    lists the pivot column of each nonzero row.
    """
    r = _as_bits(a)
    rows, cols = r.shape
    pivots: list[int] = []
    i = 0
    for c in range(cols):
        if i == rows:
            break
        hit = np.flatnonzero(r[i:, c])
        if hit.size == 0:
            continue
        p = i + int(hit[0])
        if p != i:
            r[[i, p]] = r[[p, i]]
        others = np.flatnonzero(r[:, c])
        others = others[others != i]
        r[others] ^= r[i]
        pivots.append(c)
        i += 1
    return r, pivots


def rank(a) -> int:
    return len(row_reduce(a)[1])


def null_space(a) -> np.ndarray:
    """Basis of {x : a x = 0 (mod 2)} as the rows of a (k, cols) array."""
    r, pivots = row_reduce(a)
    cols = r.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = r[i, f]
    return basis


def matmul(a, b) -> np.ndarray:
    return (np.asarray(a, np.int64) @ np.asarray(b, np.int64) & 1).astype(np.uint8)


def span(basis) -> np.ndarray:
    """All 2^k combinations of the rows of ``basis`` (k <= 20)."""
    basis = np.asarray(basis, np.uint8)
    k = basis.shape[0]
    if k > 20:
        raise ValueError("span enumeration is limited to 20 basis vectors")
    coeffs = (np.arange(1 << k)[:, None] >> np.arange(k)[None, :]) & 1
    return matmul(coeffs, basis)
