"""Clifford conjugation rules on packed Pauli rows.

Each rule maps rows ``P -> U P U^dagger`` in place on the packed ``x``/``z``
arrays (shape ``(rows, words)``) and returns a boolean array marking rows
whose sign flips.
"""

from __future__ import annotations

import numpy as np

from .bits import locate

ONE_QUBIT = ("H", "S", "S_DAG", "X", "Y", "Z", "SQRT_X")
TWO_QUBIT = ("CZ", "CNOT")
CLIFFORD = ONE_QUBIT + TWO_QUBIT


def _col(arr, q):
    w, m = locate(q)
    return w, m, (arr[:, w] & m) != 0


def _set(arr, w, m, bits):
    arr[:, w] = np.where(bits, arr[:, w] | m, arr[:, w] & ~m)


def conjugate(gate: str, x: np.ndarray, z: np.ndarray, targets) -> np.ndarray:
    if gate in ONE_QUBIT:
        (q,) = targets
        w, m, xq = _col(x, q)
        _, _, zq = _col(z, q)
        if gate == "H":
            _set(x, w, m, zq)
            _set(z, w, m, xq)
            return xq & zq
        if gate == "S":
            _set(z, w, m, xq ^ zq)
            return xq & zq
        if gate == "S_DAG":
            _set(z, w, m, xq ^ zq)
            return xq & ~zq
        if gate == "SQRT_X":
            _set(x, w, m, xq ^ zq)
            return zq & ~xq
        if gate == "X":
            return zq.copy()
        if gate == "Y":
            return xq ^ zq
        return xq.copy()  # Z
    if gate == "CNOT":
        c, t = targets
        wc, mc, xc = _col(x, c)
        _, _, zc = _col(z, c)
        wt, mt, xt = _col(x, t)
        _, _, zt = _col(z, t)
        flip = xc & zt & ~(xt ^ zc)
        _set(x, wt, mt, xt ^ xc)
        _set(z, wc, mc, zc ^ zt)
        return flip
    if gate == "CZ":
        a, b = targets
        wa, ma, xa = _col(x, a)
        _, _, za = _col(z, a)
        wb, mb, xb = _col(x, b)
        _, _, zb = _col(z, b)
        flip = xa & xb & (za ^ zb)
        _set(z, wa, ma, za ^ xb)
        _set(z, wb, mb, zb ^ xa)
        return flip
    raise ValueError(f"unknown Clifford gate {gate!r}")
