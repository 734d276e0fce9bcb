"""Nearest-neighbour qubit grids with an optional defect mask."""

from __future__ import annotations

import math
from collections import deque

import numpy as np


class GridGraph:
    """Active sites of a ``rows x cols`` lattice.

    Nodes are numbered ``0..n-1`` over active sites in row-major order. Edges
    join active sites at Manhattan distance 1 and carry one of four colours:
    horizontal edges get ``col % 2`` and vertical ones ``2 + row % 2``, where
    ``(row, col)`` is the edge's upper-left end. Edges of one colour share no
    node, so each colour class fits in a single CZ layer.
    """

    def __init__(self, rows: int, cols: int, mask=None):
        if rows < 1 or cols < 1:
            raise ValueError("grid needs rows, cols >= 1")
        self.rows, self.cols = rows, cols
        if mask is None:
            mask = np.ones((rows, cols), bool)
        mask = np.asarray(mask, bool)
        if mask.shape != (rows, cols):
            raise ValueError("mask shape must be (rows, cols)")
        if not mask.any():
            raise ValueError("grid has no active sites")
        self.mask = mask.copy()
        self.coords = [tuple(map(int, rc)) for rc in np.argwhere(mask)]
        self._index = {rc: i for i, rc in enumerate(self.coords)}
        self.edges: list[tuple[int, int]] = []
        self.edge_colors: list[int] = []
        for (r, c), i in self._index.items():
            right = self._index.get((r, c + 1))
            if right is not None:
                self.edges.append((i, right))
                self.edge_colors.append(c % 2)
            down = self._index.get((r + 1, c))
            if down is not None:
                self.edges.append((i, down))
                self.edge_colors.append(2 + r % 2)
        order = sorted(range(len(self.edges)), key=lambda e: self.edges[e])
        self.edges = [self.edges[e] for e in order]
        self.edge_colors = [self.edge_colors[e] for e in order]
        self._adj = [[] for _ in self.coords]
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for nb in self._adj:
            nb.sort()

    @classmethod
    def rect(cls, rows: int, cols: int) -> "GridGraph":
        return cls(rows, cols)

    @classmethod
    def centered(cls, n: int) -> "GridGraph":
        """``n`` sites on the smallest square grid, grown around its centre.

        Keeps the ``n`` sites closest (Manhattan) to the centre, ties broken
        in row-major order; the kept set is always connected.
        """
        if n < 1:
            raise ValueError("need at least one site")
        side = math.isqrt(n - 1) + 1
        cr, cc = (side - 1) // 2, (side - 1) // 2
        sites = sorted(
            ((r, c) for r in range(side) for c in range(side)),
            key=lambda rc: (abs(rc[0] - cr) + abs(rc[1] - cc), rc),
        )
        mask = np.zeros((side, side), bool)
        for r, c in sites[:n]:
            mask[r, c] = True
        return cls(side, side, mask)

    @property
    def num_nodes(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return self.num_nodes

    def index(self, r: int, c: int) -> int:
        try:
            return self._index[(r, c)]
        except KeyError:
            raise ValueError(f"site ({r}, {c}) is not active") from None

    def neighbors(self, i: int) -> list[int]:
        return self._adj[i]

    def center_node(self) -> int:
        """Active node nearest the geometric centre (row-major tie-break)."""
        cr, cc = (self.rows - 1) / 2, (self.cols - 1) / 2
        return min(
            range(self.num_nodes),
            key=lambda i: (abs(self.coords[i][0] - cr) + abs(self.coords[i][1] - cc), i),
        )

    def is_connected(self) -> bool:
        seen = {0}
        todo = deque([0])
        while todo:
            for nb in self._adj[todo.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        return len(seen) == self.num_nodes

    def color_classes(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[], [], [], []]
        for e, col in zip(self.edges, self.edge_colors):
            out[col].append(e)
        return out

    def __repr__(self) -> str:
        return f"GridGraph({self.rows}x{self.cols}, nodes={self.num_nodes}, edges={len(self.edges)})"
