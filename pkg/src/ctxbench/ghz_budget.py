"""GHZ fidelity from sampled stabilizers, and closed-form error budgets.

The 2^N stabilizers of GHZ_N are products of the generators Q_k = Z_k Z_{k+1}
(k < N-1) and Q_{N-1} = X...X. Stabilizer i uses Q_k when bit k of i is set.
Half of them (bit N-1 clear) are Z-type and half X-type, and
F = (F_X + F_Z) / 2.

T1 decay under dynamical decoupling is handled only by :func:`f_t1` (the
Pauli-frame sampler cannot represent amplitude damping).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .games.ghz import GhzGrowth
from .noise import NoiseParams, sample_circuit
from .stabilizer.circuit import Circuit
from .stabilizer.pauli import PauliString


class ChannelFidelity(NamedTuple):
    total: float
    z: float
    x: float


class ReadoutFidelity(NamedTuple):
    total: float
    x: float
    z: float


def generator(N: int, k: int) -> PauliString:
    if not 0 <= k < N:
        raise ValueError("generator index out of range")
    if k == N - 1:
        return PauliString.sparse(N, {j: "X" for j in range(N)})
    return PauliString.sparse(N, {k: "Z", k + 1: "Z"})


def stabilizer_from_index(N: int, i: int) -> PauliString:
    """S_i = Q_{N-1}^{i_{N-1}} ... Q_0^{i_0}, multiplied left to right."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= i < 2**N:
        raise ValueError(f"stabilizer index must lie in [0, 2^{N})")
    out = PauliString.identity(N)
    for k in range(N - 1, -1, -1):
        if (i >> k) & 1:
            out = out * generator(N, k)
    return out


def z_support(bits: np.ndarray) -> np.ndarray:
    """Qubits carrying Z in the product of Z_k Z_{k+1} over the set bits k.

    ``bits`` has length N-1 (generator choices i_0..i_{N-2}).
    """
    bits = np.asarray(bits, bool)
    pad = np.concatenate([[False], bits, [False]])
    return pad[1:] ^ pad[:-1]


def x_type_stabilizer(bits: np.ndarray) -> PauliString:
    """X...X times the Z-type part chosen by ``bits`` (length N-1)."""
    zs = z_support(bits)
    N = len(zs)
    return generator(N, N - 1) * PauliString.from_bits(np.zeros(N, bool), zs)


def _sample_classes(N: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m distinct generator-choice vectors of length N-1."""
    total = 2 ** (N - 1)
    if m > total:
        raise ValueError(f"m = {m} exceeds the {total} stabilizers per class")
    if m == total:
        return np.array([[(i >> k) & 1 for k in range(N - 1)] for i in range(total)], bool).reshape(total, N - 1)
    seen: set[bytes] = set()
    rows = []
    while len(rows) < m:
        b = rng.integers(0, 2, size=N - 1).astype(bool)
        key = np.packbits(b).tobytes()
        if key not in seen:
            seen.add(key)
            rows.append(b)
    return np.array(rows, bool).reshape(m, N - 1)


def default_m(N: int, m: int = 200) -> int:
    return min(m, 2 ** (N - 1))


@dataclass
class FidelityReport:
    """Fidelity estimate with its X/Z split and analytic factors.

    ``F`` is always (F_X + F_Z) / 2. ``F_total`` is the product of the
    per-channel totals, which differs from ``F`` at second order.
    """

    N: int
    F: float
    F_X: float
    F_Z: float
    sigma: float = 0.0
    sigma_X: float = 0.0
    sigma_Z: float = 0.0
    F_T1: float | None = None
    F_sq: float | None = None
    F_2q: float | None = None
    F_readout: float | None = None
    F_total: float | None = None
    n_sq: int | None = None
    n_2q: int | None = None
    m_x: int = 0
    m_z: int = 0
    shots: int = 0
    idle_times: list[float] = field(default_factory=list)

    @property
    def witnessed(self) -> bool:
        """Genuine N-partite entanglement is witnessed when F > 1/2."""
        return self.F > 0.5


def _rotation_circuit(prep: Circuit, pauli: PauliString) -> tuple[Circuit, set[int]]:
    c = prep.copy()
    start = len(c.ops)
    for q in range(pauli.num_qubits):
        ch = pauli[q]
        if ch == "Y":
            c.append("S_DAG", q)
        if ch in "XY":
            c.append("H", q)
    rot = set(range(start, len(c.ops)))
    for q in range(pauli.num_qubits):
        c.append("MEASURE_Z", q, key=f"q{q}")
    return c, rot


def estimate_fidelity_mc(circuit: Circuit | GhzGrowth, noise: NoiseParams | None,
                         m_stabilizers: int, shots: int, rng: np.random.Generator,
                         rotation_noise: bool = True, m_z: int | None = None) -> FidelityReport:
    """Monte-Carlo GHZ fidelity of the state prepared by ``circuit``.

    F_Z reuses one batch of computational-basis shots for all sampled Z-type
    stabilizers. F_X runs one rotated-basis circuit per sampled X-type
    stabilizer. With ``rotation_noise=False`` the basis-change gates are
    noiseless, isolating preparation and readout errors.
    """
    prep = circuit.circuit if isinstance(circuit, GhzGrowth) else circuit
    N = prep.num_qubits
    if N < 2:
        raise ValueError("fidelity estimation needs N >= 2")
    if m_stabilizers < 1 or shots < 1:
        raise ValueError("m_stabilizers and shots must be >= 1")
    m_z = m_stabilizers if m_z is None else m_z

    z_choice = _sample_classes(N, m_z, rng)
    zc = prep.copy()
    for q in range(N):
        zc.append("MEASURE_Z", q, key=f"q{q}")
    bits = sample_circuit(zc, noise, shots, rng).get_many([f"q{q}" for q in range(N)])
    supports = np.array([z_support(b) for b in z_choice], np.int64)  # (m, N)
    parity = (bits.astype(np.int64) @ supports.T) & 1  # (shots, m)
    per_shot = (1 - 2 * parity).mean(axis=1)
    F_Z = float(per_shot.mean())
    sigma_Z = float(per_shot.std() / math.sqrt(shots))

    x_choice = _sample_classes(N, m_stabilizers, rng)
    est = np.empty(len(x_choice))
    for j, b in enumerate(x_choice):
        p = x_type_stabilizer(b)
        c, rot = _rotation_circuit(prep, p)
        s = sample_circuit(c, noise, shots, rng, quiet_ops=() if rotation_noise else rot)
        y = s.get_many([f"q{q}" for q in range(N)])
        sign = 1 if p.phase == 0 else -1
        par = y.astype(np.int64).sum(axis=1) & 1
        est[j] = sign * float((1 - 2 * par).mean())
    F_X = float(est.mean())
    sigma_X = float(est.std() / math.sqrt(len(est)))
    if len(est) == 2 ** (N - 1):
        # every X-type stabilizer sampled: only shot noise remains
        sigma_X = float(np.sqrt(np.mean(1 - est**2) / shots) / math.sqrt(len(est)))

    return FidelityReport(
        N=N, F=0.5 * (F_X + F_Z), F_X=F_X, F_Z=F_Z,
        sigma=0.5 * math.sqrt(sigma_X**2 + sigma_Z**2), sigma_X=sigma_X, sigma_Z=sigma_Z,
        n_sq=prep.n_single_qubit_gates, n_2q=prep.n_two_qubit_gates,
        m_x=len(x_choice), m_z=len(z_choice), shots=shots,
    )


def f_t1(idle_times, T1: float) -> ChannelFidelity:
    """GHZ fidelity after per-qubit idles ``t_i`` under DD, and its Z/X parts.

    F = [2^-N (prod(1 + e_i) + prod(1 - e_i)) + prod(sqrt(e_i))] / 2 with
    e_i = exp(-t_i / T1); the bracketed population term is the Z part and
    the coherence term the X part.
    """
    if T1 <= 0:
        raise ValueError("T1 must be positive")
    t = np.asarray(idle_times, float)
    if (t < 0).any():
        raise ValueError("idle times must be nonnegative")
    e = np.exp(-t / T1)
    N = t.size
    z = float((np.prod(1 + e) + np.prod(1 - e)) / 2.0**N)
    x = float(np.prod(np.exp(-t / (2 * T1))))
    return ChannelFidelity(0.5 * (z + x), z, x)


def _check_rate(e: float, n: int):
    if not 0.0 <= e <= 1.0:
        raise ValueError("error rate must lie in [0, 1]")
    if n < 0:
        raise ValueError("gate count must be nonnegative")


def f_sq(n_sq: int, e: float) -> ChannelFidelity:
    """Depolarizing single-qubit gates: any Pauli hurts, only X/Y hurt Z-type."""
    _check_rate(e, n_sq)
    total = (1 - e) ** n_sq
    z = (1 - 2 * e / 3) ** n_sq
    return ChannelFidelity(total, z, 2 * total - z)


def f_2q(n_2q: int, e: float) -> ChannelFidelity:
    """Two-qubit depolarizing: 14 of 15 Paulis hurt, 12 of 15 hurt Z-type."""
    _check_rate(e, n_2q)
    total = (1 - 14 * e / 15) ** n_2q
    z = (1 - 12 * e / 15) ** n_2q
    return ChannelFidelity(total, z, 2 * total - z)


def f_readout(e0: float = 0.0, e1: float = 0.0, epsilon: float | None = None,
              N: int = 1, mode: str = "sym") -> ReadoutFidelity:
    """Readout-limited GHZ fidelity, returned as (total, X part, Z part).

    ``mode="sym"`` uses epsilon (or e0 when epsilon is None) for both error
    directions; ``mode="asym"`` keeps e0 and e1 and includes the
    oscillating (e1 - e0)^N cos(pi N / 4) term.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if mode == "sym":
        eps = e0 if epsilon is None else epsilon
        _check_rate(eps, 0)
        x = (1 - 2 * eps) ** N
        z = (1 - eps) ** N + eps**N
        return ReadoutFidelity(0.5 * (x + z), x, z)
    if mode != "asym":
        raise ValueError("mode must be 'sym' or 'asym'")
    if epsilon is not None:
        e0 = e1 = epsilon
    _check_rate(e0, 0)
    _check_rate(e1, 0)
    z = 0.5 * ((1 - e0) ** N + e0**N + (1 - e1) ** N + e1**N)
    x = (1 - e0 - e1) ** N + 2.0 ** (1 - N / 2) * (e1 - e0) ** N * math.cos(math.pi * N / 4)
    return ReadoutFidelity(0.5 * (x + z), x, z)


@dataclass
class GhzSchedule:
    N: int
    n_sq: int
    n_2q: int
    idle_times: list[float]


def schedule_from_growth(growth: GhzGrowth, noise: NoiseParams, dd_pulses: int = 0) -> GhzSchedule:
    """Gate counts and per-qubit idle times of a grown GHZ circuit.

    A qubit idles from the moment it was entangled to the end of the
    circuit. In ``"moment"`` mode every moment lasts ``moment_duration``; in
    ``"durations"`` mode a moment lasts as long as its slowest op.
    ``dd_pulses`` adds decoupling pulses to the single-qubit gate count.
    """
    c = growth.circuit
    depth = c.depth
    if noise.idle_mode == "moment":
        ends = [(depth - j) * noise.moment_duration for j in growth.join_moment]
    else:
        lengths = [max(noise.duration(op.kind) for op in ops) if ops else noise.moment_duration
                   for ops in c.moments()]
        tail = np.concatenate([np.cumsum(lengths[::-1])[::-1], [0.0]])
        ends = [float(tail[j]) for j in growth.join_moment]
    return GhzSchedule(c.num_qubits, c.n_single_qubit_gates + dd_pulses, c.n_two_qubit_gates, ends)


def f_total(params: NoiseParams, N: int, schedule: GhzSchedule | None) -> FidelityReport:
    """Independent-channel budget: F_total = F_T1 * F_sq * F_2q * F_readout."""
    if schedule is None:
        raise ValueError("f_total needs a schedule (gate counts and idle times)")
    if schedule.N != N:
        raise ValueError("schedule size does not match N")
    t1 = f_t1(schedule.idle_times, params.T1)
    sq = f_sq(schedule.n_sq, params.e_p_sq)
    tq = f_2q(schedule.n_2q, params.e_p_2q)
    if params.e0 == params.e1:
        ro = f_readout(epsilon=params.e0, N=N, mode="sym")
    else:
        ro = f_readout(params.e0, params.e1, N=N, mode="asym")
    fx = t1.x * sq.x * tq.x * ro.x
    fz = t1.z * sq.z * tq.z * ro.z
    return FidelityReport(
        N=N, F=0.5 * (fx + fz), F_X=fx, F_Z=fz,
        F_T1=t1.total, F_sq=sq.total, F_2q=tq.total, F_readout=ro.total,
        F_total=t1.total * sq.total * tq.total * ro.total,
        n_sq=schedule.n_sq, n_2q=schedule.n_2q, idle_times=list(schedule.idle_times),
    )


def win_prob_from_fx(F_X: float) -> float:
    if not -1.0 <= F_X <= 1.0:
        raise ValueError("F_X must lie in [-1, 1]")
    return 0.5 * (1.0 + F_X)
