"""The 2D hidden linear function problem on a qubit grid.

An instance is a symmetric bit matrix ``A`` supported on the grid's edges and
diagonal. With ``q(x) = x^T A x (mod 4)`` the task is to find ``z`` such that
``q(x) = 2 z.x (mod 4)`` for every ``x`` in the GF(2) kernel of ``A``. The
shallow circuit is H on all qubits, S where ``A_ii = 1``, CZ on edges with
``A_ij = 1`` in four colour layers, H on all qubits, then measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from .grid import GridGraph
from .noise import NoiseParams, sample_circuit
from .stabilizer.circuit import Circuit

CZ_LAYERS = 4
N_RANDOM_CHECKS = 32


@dataclass
class NullSpaceBasis:
    vectors: np.ndarray  # (k, n) uint8
    rank: int

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


def null_space_basis(A) -> NullSpaceBasis:
    A = np.asarray(A, np.uint8)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("A must be symmetric")
    vecs = gf2.null_space(A)
    return NullSpaceBasis(vecs, A.shape[0] - len(vecs))


def quadratic_form(A, x) -> int | np.ndarray:
    """``sum_ij A_ij x_i x_j mod 4`` for one vector or a stack of rows."""
    A = np.asarray(A, np.int64)
    x = np.asarray(x, np.int64)
    if x.shape[-1] != A.shape[0] or A.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch between A and x")
    q = np.einsum("...i,ij,...j->...", x, A, x) % 4
    return int(q) if q.ndim == 0 else q


@dataclass
class HlfInstance:
    grid: GridGraph
    A: np.ndarray
    p_gate: float
    seed: int | None = None
    _basis: NullSpaceBasis | None = field(default=None, repr=False, compare=False)
    _checks: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = self.grid.num_nodes
        self.A = np.asarray(self.A, np.uint8)
        if self.A.shape != (n, n):
            raise ValueError(f"A must be {n}x{n} for this grid")
        if not np.isin(self.A, (0, 1)).all() or not np.array_equal(self.A, self.A.T):
            raise ValueError("A must be a symmetric 0/1 matrix")
        allowed = np.eye(n, dtype=bool)
        for a, b in self.grid.edges:
            allowed[a, b] = allowed[b, a] = True
        if (self.A.astype(bool) & ~allowed).any():
            raise ValueError("A has an off-diagonal entry that is not a grid edge")

    @property
    def n(self) -> int:
        return self.grid.num_nodes

    @property
    def basis(self) -> NullSpaceBasis:
        if self._basis is None:
            self._basis = null_space_basis(self.A)
        return self._basis

    @property
    def n_s_gates(self) -> int:
        return int(np.trace(self.A))

    @property
    def n_cz_gates(self) -> int:
        return int(sum(self.A[a, b] for a, b in self.grid.edges))

    def check_vectors(self):
        """Kernel basis plus 32 fixed random combinations, and their q values."""
        if self._checks is None:
            b = self.basis.vectors
            if len(b):
                rng = np.random.default_rng(0)
                coeffs = rng.integers(0, 2, size=(N_RANDOM_CHECKS, len(b)))
                vecs = np.vstack([b, gf2.matmul(coeffs, b)])
            else:
                vecs = np.zeros((0, self.n), np.uint8)
            self._checks = (vecs, np.atleast_1d(quadratic_form(self.A, vecs)))
        return self._checks


def random_instance(grid: GridGraph, p_gate: float, rng: np.random.Generator,
                    seed: int | None = None) -> HlfInstance:
    """Each diagonal entry and each edge entry is 1 with probability p_gate."""
    if not 0.0 <= p_gate <= 1.0:
        raise ValueError("p_gate must lie in [0, 1]")
    n = grid.num_nodes
    A = np.zeros((n, n), np.uint8)
    A[np.diag_indices(n)] = rng.random(n) < p_gate
    on = rng.random(len(grid.edges)) < p_gate
    for (a, b), bit in zip(grid.edges, on):
        A[a, b] = A[b, a] = bit
    return HlfInstance(grid, A, float(p_gate), seed)


def build_hlf_circuit(inst: HlfInstance) -> Circuit:
    """H, S, four CZ colour layers, H, measure, at explicit moments 0..7."""
    n = inst.n
    c = Circuit(n)
    for q in range(n):
        c.append("H", q, moment=0)
    for q in range(n):
        if inst.A[q, q]:
            c.append("S", q, moment=1)
    classes = inst.grid.color_classes()
    assert len(classes) == CZ_LAYERS
    for layer, edges in enumerate(classes):
        for a, b in edges:
            if inst.A[a, b]:
                c.append("CZ", a, b, moment=2 + layer)
    for q in range(n):
        c.append("H", q, moment=2 + CZ_LAYERS)
    for q in range(n):
        c.append("MEASURE_Z", q, key=f"z{q}", moment=3 + CZ_LAYERS)
    return c


def solve(inst: HlfInstance, noise: NoiseParams | None, shots: int,
          rng: np.random.Generator) -> np.ndarray:
    """Candidate solutions, one row of bits per shot."""
    c = build_hlf_circuit(inst)
    s = sample_circuit(c, noise, shots, rng)
    return s.get_many([f"z{q}" for q in range(inst.n)])


def verify_many(inst: HlfInstance, Z) -> np.ndarray:
    """Vectorised :func:`verify_solution` over the rows of ``Z``."""
    Z = np.atleast_2d(np.asarray(Z, np.int64))
    if Z.shape[1] != inst.n:
        raise ValueError("z length must equal n")
    vecs, q = inst.check_vectors()
    if len(vecs) == 0:
        return np.ones(len(Z), bool)
    lhs = (2 * (Z @ vecs.T.astype(np.int64))) % 4
    return (lhs == q[None, :]).all(axis=1)


def verify_solution(inst: HlfInstance, z) -> bool:
    """``q(b) = 2 z.b (mod 4)`` on the kernel basis and 32 random combinations."""
    z = np.asarray(z)
    if z.ndim != 1:
        raise ValueError("z must be a bit vector")
    return bool(verify_many(inst, z[None, :])[0])


def brute_force_solutions(inst: HlfInstance) -> set[tuple[int, ...]]:
    """Every valid z, tested against all kernel vectors (n <= 16)."""
    n = inst.n
    if n > 16:
        raise ValueError("brute force is limited to n <= 16")
    if len(inst.basis) > 20:
        raise ValueError("kernel dimension above 20")
    kernel = gf2.span(inst.basis.vectors)
    q = np.atleast_1d(quadratic_form(inst.A, kernel))
    weights = 1 << np.arange(n - 1, -1, -1)
    zs = np.arange(1 << n, dtype=np.int64)
    for x, qx in zip(kernel, q):
        if qx % 2:
            return set()
        mask = int(x.astype(np.int64) @ weights)
        par = np.bitwise_count(zs & mask) & 1
        zs = zs[par == qx // 2]
    bits = (zs[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return {tuple(int(v) for v in row) for row in bits}


def classical_depth_bound(grid: GridGraph) -> float:
    """log2(E + V): conjectured layers of fan-in-2 gates for an exact solution."""
    return math.log2(len(grid.edges) + grid.num_nodes)


def effective_depth(fraction: float, depth: int = CZ_LAYERS) -> float:
    """``depth / fraction``; NaN flags a zero success fraction."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if fraction == 0.0:
        return math.nan
    return depth / fraction


def tts(depth: float, p_success: float) -> float:
    return effective_depth(p_success, depth)


def bravyi_bound_extrapolation(n: int, c: float) -> float:
    """``c log2(n) / 16``, the asymptotic bound carried to finite n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if c < 0:
        raise ValueError("c must be nonnegative")
    return c * math.log2(n) / 16


@dataclass
class HlfReport:
    n: int
    shots: int
    correct: int
    fraction: float
    effective_depth: float
    L_classical: float
    tts: float
    n_s_gates: int = 0
    n_cz_gates: int = 0

    @property
    def undefined(self) -> bool:
        return self.correct == 0


def run_instance(inst: HlfInstance, noise: NoiseParams | None, shots: int,
                 rng: np.random.Generator) -> HlfReport:
    ok = verify_many(inst, solve(inst, noise, shots, rng))
    correct = int(ok.sum())
    frac = correct / shots
    d = effective_depth(frac)
    return HlfReport(inst.n, shots, correct, frac, d, classical_depth_bound(inst.grid),
                     tts(CZ_LAYERS, frac), inst.n_s_gates, inst.n_cz_gates)


# instance files: "key value" header lines, then "entries" and one "i j" per line

def format_instance(inst: HlfInstance) -> str:
    g = inst.grid
    lines = [
        "# hlf instance",
        f"rows {g.rows}",
        f"cols {g.cols}",
        f"p_gate {inst.p_gate!r}",
        f"seed {'none' if inst.seed is None else inst.seed}",
    ]
    if not g.mask.all():
        lines.append("mask " + "".join("1" if m else "0" for m in g.mask.ravel()))
    lines.append("entries")
    ii, jj = np.nonzero(np.triu(inst.A))
    lines += [f"{i} {j}" for i, j in zip(ii, jj)]
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> HlfInstance:
    head: dict[str, str] = {}
    entries: list[tuple[int, int]] = []
    in_entries = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "entries":
            in_entries = True
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two fields, got {raw!r}")
        if in_entries:
            try:
                entries.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"line {lineno}: entry indices must be integers") from None
        else:
            if parts[0] not in ("rows", "cols", "p_gate", "seed", "mask"):
                raise ValueError(f"line {lineno}: unknown header key {parts[0]!r}")
            head[parts[0]] = parts[1]
    for key in ("rows", "cols", "p_gate"):
        if key not in head:
            raise ValueError(f"instance file lacks {key!r}")
    rows, cols = int(head["rows"]), int(head["cols"])
    mask = None
    if "mask" in head:
        m = head["mask"]
        if len(m) != rows * cols or set(m) - {"0", "1"}:
            raise ValueError("mask must hold rows*cols 0/1 characters")
        mask = np.array([ch == "1" for ch in m]).reshape(rows, cols)
    grid = GridGraph(rows, cols, mask)
    n = grid.num_nodes
    A = np.zeros((n, n), np.uint8)
    for i, j in entries:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"entry ({i}, {j}) out of range for n = {n}")
        A[i, j] = A[j, i] = 1
    seed = head.get("seed", "none")
    return HlfInstance(grid, A, float(head["p_gate"]), None if seed == "none" else int(seed))


def write_instance(inst: HlfInstance, path) -> None:
    Path(path).write_text(format_instance(inst))


def read_instance(path) -> HlfInstance:
    return parse_instance(Path(path).read_text())


def parse_bits(s: str, n: int | None = None) -> np.ndarray:
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError("bitstring must contain only 0 and 1")
    if n is not None and len(s) != n:
        raise ValueError(f"bitstring has length {len(s)}, expected {n}")
    return np.array([int(ch) for ch in s], np.uint8)
