"""Undirected graphs and vertex partitions shared by the solvers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


class InvalidGraphError(ValueError):
    pass


class InvalidPartitionError(ValueError):
    pass


Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored canonically as ``(min, max)`` and sorted, so iteration
    order is deterministic.
    """

    n: int
    edges: tuple[Edge, ...]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise InvalidGraphError("vertex count must be non-negative")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise InvalidGraphError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidGraphError(f"edge ({i}, {j}) out of range for n={n}")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        adj: list[list[int]] = [[] for _ in range(n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, n: int) -> "Graph":
        return cls(n, [(0, i) for i in range(1, n)])

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Graph":
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        return cls(rows * cols, edges)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def ball(self, center: int, radius: int) -> list[int]:
        """Vertices within graph distance ``radius`` of ``center`` (BFS)."""
        dist = {center: 0}
        queue = deque([center])
        while queue:
            v = queue.popleft()
            if dist[v] == radius:
                continue
            for w in self._adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return sorted(dist)

    def subgraph(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph, relabelled ``0..len-1``; also returns the label map."""
        verts = sorted(set(vertices))
        index = {v: k for k, v in enumerate(verts)}
        edges = [(index[i], index[j]) for i, j in self.edges if i in index and j in index]
        return Graph(len(verts), edges), verts


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, blocks: Iterable[Iterable[int]]):
        canon = [tuple(sorted(set(int(v) for v in b))) for b in blocks]
        canon = [b for b in canon if b]
        canon.sort()
        object.__setattr__(self, "blocks", tuple(canon))

    @property
    def k(self) -> int:
        return max((len(b) for b in self.blocks), default=0)

    def block_of(self) -> dict[int, int]:
        return {v: m for m, b in enumerate(self.blocks) for v in b}

    def validate(self, n: int) -> None:
        seen: set[int] = set()
        for b in self.blocks:
            for v in b:
                if v in seen:
                    raise InvalidPartitionError(f"vertex {v} appears in more than one block")
                if not 0 <= v < n:
                    raise InvalidPartitionError(f"vertex {v} out of range for n={n}")
                seen.add(v)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise InvalidPartitionError(f"partition does not cover vertices {missing}")

    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]


def internal_edges(g: Graph, p: Partition) -> list[Edge]:
    """Edges whose endpoints lie in the same block."""
    p.validate(g.n)
    owner = p.block_of()
    return [e for e in g.edges if owner[e[0]] == owner[e[1]]]


def cut_edges(g: Graph, p: Partition) -> list[Edge]:
    p.validate(g.n)
    owner = p.block_of()
    return [e for e in g.edges if owner[e[0]] != owner[e[1]]]


def read_edge_list(path: str | Path, n: int | None = None) -> Graph:
    """Parse a 1-based ``i j`` edge list; ``#`` lines are comments."""
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidGraphError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidGraphError(f"{path}:{lineno}: non-integer vertex in {line!r}") from None
        if i < 1 or j < 1:
            raise InvalidGraphError(f"{path}:{lineno}: vertices are 1-based")
        edges.append((i - 1, j - 1))
    if n is None:
        n = max((max(e) for e in edges), default=-1) + 1
    return Graph(n, edges)


def write_edge_list(g: Graph, path: str | Path) -> None:
    lines = [f"{i + 1} {j + 1}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
