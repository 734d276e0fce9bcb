"""N-player GHZ parity game with GHZ states grown on a 2D grid.

Players receive bits x with even total weight and must answer bits y with
sum(y) = sum(x)/2 (mod 2). Sharing a GHZ state, each player applies S when
x_j = 1, then H, and measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..grid import GridGraph
from ..noise import NoiseParams, sample_circuit
from ..stabilizer.circuit import Circuit


@dataclass
class GhzGrowth:
    """A GHZ-preparation circuit and when each qubit joined the state.

    ``join_moment[q]`` is the moment of the CZ that entangled ``q`` (the
    root's H moment for the root); ``parent[q]`` is -1 for the root.
    """

    circuit: Circuit
    root: int
    join_moment: list[int]
    parent: list[int]
    order: list[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return self.circuit.depth


def bfs_growth(g: GridGraph, rng: np.random.Generator, root: int | None = None) -> GhzGrowth:
    """Randomised breadth-first GHZ growth (CNOT realised as H, CZ, H).

    Each BFS layer is shuffled. A new qubit attaches to the already
    entangled neighbour that became free earliest (random tie-break), so
    gates pack as soon as possible.
    """
    n = g.num_nodes
    if not g.is_connected():
        raise ValueError("grid active sites are disconnected")
    root = g.center_node() if root is None else root
    if not 0 <= root < n:
        raise ValueError(f"root {root} is not a grid node")
    c = Circuit(n)
    c.append("H", root)
    last = [-1] * n
    last[root] = 0
    join = [-1] * n
    join[root] = 0
    parent = [-1] * n
    order = [root]
    entangled = {root}
    layer = [root]
    while layer:
        frontier = sorted({nb for q in layer for nb in g.neighbors(q) if nb not in entangled})
        rng.shuffle(frontier)
        before = set(entangled)
        for t in frontier:
            cands = [p for p in g.neighbors(t) if p in before]
            best = min(last[p] for p in cands)
            ties = [p for p in cands if last[p] == best]
            p = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
            m = max(last[p] + 1, 1)
            c.append("H", t, moment=m - 1)
            c.append("CZ", p, t, moment=m)
            c.append("H", t, moment=m + 1)
            last[p] = m
            last[t] = m + 1
            join[t] = m
            parent[t] = p
            order.append(t)
        entangled.update(frontier)
        layer = frontier
    return GhzGrowth(c, root, join, parent, order)


def bfs_growth_circuit(g: GridGraph, root: int | None, rng: np.random.Generator) -> Circuit:
    return bfs_growth(g, rng, root).circuit


def sample_questions(N: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform even-weight question vector(s) of length N."""
    if N < 2:
        raise ValueError("the GHZ game needs N >= 2 players")
    count = 1 if size is None else size
    x = rng.integers(0, 2, size=(count, N), dtype=np.uint8)
    x[:, -1] = x[:, :-1].sum(axis=1) & 1
    return x[0] if size is None else x


def _check_promise(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.ndim != 1 or not np.isin(x, (0, 1)).all():
        raise ValueError("questions must be a 0/1 vector")
    if int(x.sum()) % 2:
        raise ValueError("question vector violates the even-weight promise")
    return x


@dataclass
class GhzGameInstance:
    N: int
    x: np.ndarray
    growth_seed: int
    grid: GridGraph

    def __post_init__(self):
        self.x = _check_promise(self.x)
        if len(self.x) != self.N or self.grid.num_nodes != self.N:
            raise ValueError("question length and grid size must equal N")

    @classmethod
    def create(cls, x, growth_seed: int, grid: GridGraph | None = None) -> "GhzGameInstance":
        x = _check_promise(x)
        grid = GridGraph.centered(len(x)) if grid is None else grid
        return cls(len(x), x, growth_seed, grid)

    def growth(self) -> GhzGrowth:
        return bfs_growth(self.grid, np.random.default_rng(self.growth_seed))


def game_circuit(growth: GhzGrowth, x) -> Circuit:
    x = _check_promise(x)
    c = growth.circuit.copy()
    if len(x) != c.num_qubits:
        raise ValueError("question length must equal the number of players")
    for q, bit in enumerate(x):
        if bit:
            c.append("S", q)
    for q in range(c.num_qubits):
        c.append("H", q)
    for q in range(c.num_qubits):
        c.append("MEASURE_Z", q, key=f"y{q}")
    return c


def ghz_wins(x, y: np.ndarray) -> np.ndarray:
    """Win mask for answers ``y`` (shots x N) to questions ``x``."""
    x = np.asarray(x)
    target = (int(x.sum()) // 2) & 1
    return (np.asarray(y).sum(axis=-1) & 1) == target


def play_ghz_game(instance: GhzGameInstance, noise: NoiseParams | None,
                  rng: np.random.Generator, shots: int = 1,
                  growth: GhzGrowth | None = None) -> np.ndarray:
    """Play ``shots`` rounds; returns the boolean win array."""
    growth = instance.growth() if growth is None else growth
    c = game_circuit(growth, instance.x)
    s = sample_circuit(c, noise, shots, rng)
    return ghz_wins(instance.x, s.get_many([f"y{q}" for q in range(instance.N)]))


def classical_bound_formula(N: int) -> float:
    """1/2 + 2^-floor(N/2), the bound as quoted for the hardware comparison."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return 0.5 + 2.0 ** -(N // 2)


def classical_bound_ceil(N: int) -> float:
    """1/2 + 2^-ceil(N/2); agrees with exhaustive search for small N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return 0.5 + 2.0 ** -math.ceil(N / 2)


RESPONSES = ("0", "1", "x", "1^x")


def classical_optimal_exhaustive(N: int):
    """Best deterministic strategy by enumerating all 4^N response tuples.

    Player j answers y_j = a_j XOR (b_j AND x_j). Returns ``(value, strategy)``
    with ``value`` a Fraction and ``strategy`` a tuple of response names.
    """
    if not 2 <= N <= 6:
        raise ValueError("exhaustive search supports 2 <= N <= 6")
    qs = np.array([q for q in product((0, 1), repeat=N) if sum(q) % 2 == 0], np.int64)
    target = (qs.sum(axis=1) // 2) & 1
    ab = np.array(list(product((0, 1), repeat=2 * N)), np.int64)
    a, b = ab[:, :N], ab[:, N:]
    parity = (a.sum(axis=1)[:, None] + b @ qs.T) & 1
    wins = (parity == target[None, :]).sum(axis=1)
    best = int(np.argmax(wins))
    names = tuple(RESPONSES[int(a[best, j]) + 2 * int(b[best, j])] for j in range(N))
    return Fraction(int(wins[best]), len(qs)), names
