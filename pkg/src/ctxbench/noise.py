"""Parametric Pauli noise and Monte-Carlo sampling of noisy Clifford circuits.

Depolarizing errors follow each gate and readout errors flip reported bits.
Idle-time amplitude damping is not Clifford, so it is never sampled here: it
enters through the dense simulator for small registers and through the
closed-form budget in :mod:`ctxbench.ghz_budget` for all sizes.

Two execution paths share the same error model:

* :func:`decorate_circuit` runs one shot on a tableau and returns the explicit
  list of injected :class:`ErrorEvent` objects.
* :func:`sample_circuit` runs many shots at once by propagating Pauli frames
  against a single noiseless reference run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .stabilizer.circuit import MEASURE, NON_CLIFFORD, RESET, Circuit, MeasurementRecord
from .stabilizer.pauli import PauliString
from .stabilizer.rules import ONE_QUBIT, TWO_QUBIT
from .stabilizer.tableau import StabilizerTableau

# local Pauli codes: bit 0 is the x part, bit 1 the z part (3 is Y)
_CODE_LABEL = {1: "X", 2: "Z", 3: "Y"}
MECHANISMS = ("sq", "2q", "readout")
IDLE_MODES = ("moment", "durations")


def _prob(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


@dataclass(frozen=True)
class NoiseParams:
    """Error rates and timing constants. All probabilities lie in [0, 1].

    ``epsilon``, when given, sets a symmetric readout error and overrides
    ``e0``/``e1``. ``e_p_2q`` is spread uniformly over the 15 non-identity
    two-qubit Paulis.
    """

    e_p_sq: float = 0.0
    e_p_2q: float = 0.0
    e0: float = 0.0
    e1: float = 0.0
    epsilon: float | None = None
    T1: float = 73e-6
    moment_duration: float = 42e-9
    gate_durations: tuple[tuple[str, float], ...] = ()
    idle_mode: str = "moment"

    def __post_init__(self):
        _prob("e_p_sq", self.e_p_sq)
        _prob("e_p_2q", self.e_p_2q)
        _prob("e0", self.e0)
        _prob("e1", self.e1)
        if self.epsilon is not None:
            _prob("epsilon", self.epsilon)
            object.__setattr__(self, "e0", float(self.epsilon))
            object.__setattr__(self, "e1", float(self.epsilon))
        if not self.T1 > 0:
            raise ValueError("T1 must be positive")
        if not self.moment_duration > 0:
            raise ValueError("moment_duration must be positive")
        if self.idle_mode not in IDLE_MODES:
            raise ValueError(f"idle_mode must be one of {IDLE_MODES}")
        durations = self.gate_durations
        if isinstance(durations, Mapping):
            durations = tuple(sorted(durations.items()))
        for kind, d in durations:
            if d < 0:
                raise ValueError(f"duration of {kind} must be nonnegative")
        object.__setattr__(self, "gate_durations", tuple(durations))

    @classmethod
    def paper_rates(cls, **overrides) -> "NoiseParams":
        """Rates quoted for the reference processor."""
        base = dict(e_p_sq=5e-4, e_p_2q=3e-3, epsilon=7e-3, T1=73e-6)
        base.update(overrides)
        return cls(**base)

    @property
    def is_noiseless(self) -> bool:
        return self.e_p_sq == 0 and self.e_p_2q == 0 and self.e0 == 0 and self.e1 == 0

    @property
    def has_readout(self) -> bool:
        return self.e0 > 0 or self.e1 > 0

    def duration(self, kind: str) -> float:
        return dict(self.gate_durations).get(kind, self.moment_duration)

    def only(self, *mechanisms: str) -> "NoiseParams":
        """Copy with every mechanism not named switched off.

        Names are ``"sq"``, ``"2q"``, ``"readout"``; ``"all"`` keeps all.
        """
        if "all" in mechanisms:
            return self
        for m in mechanisms:
            if m not in MECHANISMS:
                raise ValueError(f"unknown mechanism {m!r}; choose from {MECHANISMS}")
        keep = set(mechanisms)
        return replace(
            self,
            e_p_sq=self.e_p_sq if "sq" in keep else 0.0,
            e_p_2q=self.e_p_2q if "2q" in keep else 0.0,
            e0=self.e0 if "readout" in keep else 0.0,
            e1=self.e1 if "readout" in keep else 0.0,
            epsilon=None,
        )


@dataclass(frozen=True)
class ErrorEvent:
    op_index: int
    moment: int
    pauli: PauliString


def sample_sq_error(e: float, rng: np.random.Generator) -> PauliString | None:
    """With probability ``e`` return X, Y or Z uniformly, else ``None``."""
    if e <= 0 or rng.random() >= e:
        return None
    return PauliString.from_label("XYZ"[rng.integers(3)])


def sample_2q_error(e: float, rng: np.random.Generator) -> PauliString | None:
    """With probability ``e`` return one of the 15 non-identity 2-qubit Paulis."""
    if e <= 0 or rng.random() >= e:
        return None
    code = int(rng.integers(1, 16))
    a, b = code & 3, code >> 2
    return PauliString.from_label(_CODE_LABEL.get(a, "I") + _CODE_LABEL.get(b, "I"))


def flip_readout(bit: int, e0: float, e1: float, rng: np.random.Generator) -> int:
    e = e1 if bit else e0
    if e > 0 and rng.random() < e:
        return 1 - bit
    return bit


@dataclass
class DecoratedRun:
    record: MeasurementRecord
    raw: MeasurementRecord
    events: list[ErrorEvent] = field(default_factory=list)
    tableau: StabilizerTableau | None = None


def decorate_circuit(c: Circuit, p: NoiseParams, rng: np.random.Generator,
                     quiet_ops: Iterable[int] = ()) -> DecoratedRun:
    """One noisy shot on a tableau, recording every injected error.

    Ops whose index is in ``quiet_ops`` receive no gate error.
    """
    if not c.is_clifford:
        raise ValueError("noisy tableau execution supports Clifford circuits only")
    quiet = set(quiet_ops)
    n = c.num_qubits
    t = StabilizerTableau(n)
    run = DecoratedRun(MeasurementRecord(), MeasurementRecord(), tableau=t)
    for i, op in enumerate(c.ops):
        if op.kind == MEASURE:
            bit = t.measure(op.targets[0], rng)
            run.raw.bits[op.key] = bit
            run.record.bits[op.key] = flip_readout(bit, p.e0, p.e1, rng)
            continue
        if op.kind == RESET:
            t.reset(op.targets[0], rng)
            continue
        t.apply(op.kind, *op.targets)
        if i in quiet:
            continue
        if op.kind in TWO_QUBIT:
            err = sample_2q_error(p.e_p_2q, rng)
        else:
            err = sample_sq_error(p.e_p_sq, rng)
        if err is not None:
            full = err.on_qubits(op.targets, n)
            t.apply_pauli(full)
            run.events.append(ErrorEvent(i, op.moment, full))
    return run


class Samples:
    """Measurement results of many shots; ``bits[shot, j]`` is key ``keys[j]``."""

    def __init__(self, keys: list[str], bits: np.ndarray, raw: np.ndarray | None = None):
        self.keys = list(keys)
        self.bits = bits
        self.raw = bits if raw is None else raw
        self._index = {k: j for j, k in enumerate(self.keys)}

    @property
    def shots(self) -> int:
        return self.bits.shape[0]

    def get(self, key: str) -> np.ndarray:
        return self.bits[:, self._index[key]]

    def get_many(self, keys: Iterable[str]) -> np.ndarray:
        return self.bits[:, [self._index[k] for k in keys]]

    def record(self, shot: int) -> MeasurementRecord:
        row = self.bits[shot]
        return MeasurementRecord({k: int(row[j]) for j, k in enumerate(self.keys)}, shot)

    def __len__(self) -> int:
        return self.shots


def _hits(rng: np.random.Generator, shots: int, e: float) -> np.ndarray:
    k = rng.binomial(shots, e)
    if k == 0:
        return np.empty(0, np.int64)
    return rng.choice(shots, size=k, replace=False)


def sample_circuit(c: Circuit, p: NoiseParams | None, shots: int,
                   rng: np.random.Generator, quiet_ops: Iterable[int] = ()) -> Samples:
    """Sample ``shots`` noisy executions with a batched Pauli-frame simulation.

    A single noiseless tableau run fixes reference outcomes. Each shot carries
    an unsigned Pauli frame with a random Z gauge (re-randomised after every
    measurement and reset), which reproduces the full outcome distribution of
    random measurements as well as the effect of the sampled errors.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not c.is_clifford:
        raise ValueError("frame sampling supports Clifford circuits only")
    p = p if p is not None else NoiseParams()
    quiet = set(quiet_ops)
    n = c.num_qubits
    ref_t = StabilizerTableau(n)
    keys = c.measurement_keys
    col = {k: j for j, k in enumerate(keys)}
    raw = np.zeros((shots, len(keys)), np.uint8)
    out = raw if not p.has_readout else np.zeros_like(raw)
    x = np.zeros((n, shots), bool)
    z = rng.integers(0, 2, size=(n, shots), dtype=np.uint8).astype(bool)
    for i, op in enumerate(c.ops):
        kind = op.kind
        if kind == MEASURE:
            q = op.targets[0]
            ref = ref_t.measure(q, rng)
            bits = x[q] ^ bool(ref)
            j = col[op.key]
            raw[:, j] = bits
            if p.has_readout:
                thresh = np.where(bits, p.e1, p.e0)
                out[:, j] = bits ^ (rng.random(shots) < thresh)
            z[q] ^= rng.integers(0, 2, size=shots, dtype=np.uint8).astype(bool)
            continue
        if kind == RESET:
            q = op.targets[0]
            ref_t.reset(q, rng)
            x[q] = False
            z[q] = rng.integers(0, 2, size=shots, dtype=np.uint8).astype(bool)
            continue
        if kind in NON_CLIFFORD:
            raise ValueError(f"{kind} is not Clifford")
        ref_t.apply(kind, *op.targets)
        _frame_gate(kind, op.targets, x, z)
        if i in quiet:
            continue
        if kind in TWO_QUBIT:
            if p.e_p_2q > 0:
                idx = _hits(rng, shots, p.e_p_2q)
                if idx.size:
                    code = rng.integers(1, 16, size=idx.size)
                    a, b = op.targets
                    x[a, idx] ^= (code & 1).astype(bool)
                    z[a, idx] ^= (code & 2).astype(bool)
                    x[b, idx] ^= (code & 4).astype(bool)
                    z[b, idx] ^= (code & 8).astype(bool)
        elif kind in ONE_QUBIT and p.e_p_sq > 0:
            idx = _hits(rng, shots, p.e_p_sq)
            if idx.size:
                code = rng.integers(1, 4, size=idx.size)
                q = op.targets[0]
                x[q, idx] ^= (code & 1).astype(bool)
                z[q, idx] ^= (code & 2).astype(bool)
    return Samples(keys, out, raw)


def _frame_gate(kind: str, targets, x: np.ndarray, z: np.ndarray) -> None:
    """Propagate unsigned Pauli frames through a Clifford gate in place."""
    if kind == "H":
        (q,) = targets
        x[q], z[q] = z[q].copy(), x[q].copy()
    elif kind in ("S", "S_DAG"):
        (q,) = targets
        z[q] ^= x[q]
    elif kind == "SQRT_X":
        (q,) = targets
        x[q] ^= z[q]
    elif kind == "CNOT":
        c, t = targets
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif kind == "CZ":
        a, b = targets
        z[a] ^= x[b]
        z[b] ^= x[a]
    # X, Y, Z only change signs, which frames do not track
