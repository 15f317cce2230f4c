"""Balanced bipartite graphs: sampling, edge-coordinate indexing, neighborhoods, text I/O.

Edge coordinates number the n-by-n biadjacency cells 1..n^2 in row-major order
(L-vertex major, R-vertex minor). Everything downstream that replays or
resamples edges -- notably the interpolation path -- relies on this order
being stable across runs, so it is fixed here once.

Graphs are immutable after construction and safe to share read-only across
parallel workers.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError
from .rng import GRAPH_DRAW, RandomSeed


class Side(enum.Enum):
    L = "L"
    R = "R"

    def other(self) -> "Side":
        return Side.R if self is Side.L else Side.L


@dataclass(frozen=True)
class VertexId:
    side: Side
    index: int

    def global_index(self, n: int) -> int:
        """Position in the length-2n vertex order: L 0..n-1, then R 0..n-1."""
        return self.index if self.side is Side.L else n + self.index

    def sort_key(self) -> tuple[int, int]:
        return (0 if self.side is Side.L else 1, self.index)


# ---------------------------------------------------------------------------
# Edge-coordinate bijection (1-based, row-major with the L index outer)
# ---------------------------------------------------------------------------


def pair_to_edge_index(n: int, l: int, r: int) -> int:
    if not (0 <= l < n and 0 <= r < n):
        raise ParameterError(f"vertex pair ({l}, {r}) out of range for n={n}")
    return l * n + r + 1


def edge_index_to_pair(n: int, index: int) -> tuple[int, int]:
    if not (1 <= index <= n * n):
        raise ParameterError(f"edge index {index} outside [1, {n * n}]")
    l, r = divmod(index - 1, n)
    return l, r


@dataclass(frozen=True)
class EdgeCoordinate:
    """One cell of the L-by-R edge-indicator vector, index in [1, n^2]."""

    index: int
    pair: tuple[int, int]

    @staticmethod
    def from_index(n: int, index: int) -> "EdgeCoordinate":
        return EdgeCoordinate(index, edge_index_to_pair(n, index))

    @staticmethod
    def from_pair(n: int, l: int, r: int) -> "EdgeCoordinate":
        return EdgeCoordinate(pair_to_edge_index(n, l, r), (l, r))


# ---------------------------------------------------------------------------
# The graph itself
# ---------------------------------------------------------------------------


class BipartiteGraph:
    """A balanced bipartite graph on n+n vertices.

    Internally the edge set is a sorted array of 0-based row-major
    coordinates, with CSR index arrays for both sides. Arrays are read-only.
    """

    __slots__ = ("n", "edge_count", "coords", "el", "er",
                 "_indptr_l", "_indptr_r", "_flat_r_to_l")

    def __init__(self, n: int, coords: np.ndarray):
        if n <= 0:
            raise ParameterError(f"n must be positive, got {n}")
        coords = np.asarray(coords, dtype=np.int64)
        if coords.size and (coords.min() < 0 or coords.max() >= n * n):
            raise ParameterError("edge coordinate out of range")
        self.n = n
        self.coords = coords
        self.edge_count = int(coords.size)
        self.el = coords // n
        self.er = coords % n
        counts_l = np.bincount(self.el, minlength=n)
        self._indptr_l = np.concatenate(([0], np.cumsum(counts_l)))
        order = np.argsort(self.er, kind="stable")
        self._flat_r_to_l = self.el[order]
        counts_r = np.bincount(self.er, minlength=n)
        self._indptr_r = np.concatenate(([0], np.cumsum(counts_r)))
        for arr in (self.coords, self.el, self.er, self._indptr_l,
                    self._indptr_r, self._flat_r_to_l):
            arr.setflags(write=False)

    @staticmethod
    def from_coordinates(n: int, coords: np.ndarray) -> "BipartiteGraph":
        """Build from sorted, duplicate-free 0-based coordinates."""
        coords = np.unique(np.asarray(coords, dtype=np.int64))
        return BipartiteGraph(n, coords)

    @staticmethod
    def from_edges(n: int, pairs: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        coords = [pair_to_edge_index(n, l, r) - 1 for l, r in pairs]
        return BipartiteGraph.from_coordinates(n, np.array(coords, dtype=np.int64))

    # -- adjacency access ---------------------------------------------------

    def neighbors_l(self, i: int) -> np.ndarray:
        """Sorted R-neighbors of L-vertex i."""
        return self.er[self._indptr_l[i]:self._indptr_l[i + 1]]

    def neighbors_r(self, j: int) -> np.ndarray:
        """Sorted L-neighbors of R-vertex j."""
        return self._flat_r_to_l[self._indptr_r[j]:self._indptr_r[j + 1]]

    def neighbors(self, v: VertexId) -> np.ndarray:
        if not (0 <= v.index < self.n):
            raise ParameterError(f"vertex {v} out of range for n={self.n}")
        return self.neighbors_l(v.index) if v.side is Side.L else self.neighbors_r(v.index)

    def degrees_l(self) -> np.ndarray:
        return np.diff(self._indptr_l)

    def degrees_r(self) -> np.ndarray:
        return np.diff(self._indptr_r)

    def csr_l(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, flat R-neighbor indices) over L vertices, for bulk kernels."""
        return self._indptr_l, self.er

    def csr_r(self) -> tuple[np.ndarray, np.ndarray]:
        return self._indptr_r, self._flat_r_to_l

    def has_edge(self, l: int, r: int) -> bool:
        row = self.neighbors_l(l)
        k = np.searchsorted(row, r)
        return bool(k < row.size and row[k] == r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.n, self.coords.tobytes()))

    def __repr__(self):
        return f"BipartiteGraph(n={self.n}, edge_count={self.edge_count})"


def validate_graph(graph: BipartiteGraph) -> None:
    """Full-scan structural check: bipartite, symmetric, consistent counts."""
    n = graph.n
    if graph.el.size and (graph.el.min() < 0 or graph.el.max() >= n):
        raise ParameterError("L endpoint out of range")
    if graph.er.size and (graph.er.min() < 0 or graph.er.max() >= n):
        raise ParameterError("R endpoint out of range")
    if np.unique(graph.coords).size != graph.edge_count:
        raise ParameterError("duplicate edges present")
    if int(graph.degrees_l().sum()) != graph.edge_count:
        raise ParameterError("L-degree sum disagrees with edge_count")
    if int(graph.degrees_r().sum()) != graph.edge_count:
        raise ParameterError("R-degree sum disagrees with edge_count")
    # symmetry: the edge set reconstructed from each side's adjacency agrees
    from_l = {(l, r) for l in range(n) for r in graph.neighbors_l(l)}
    from_r = {(l, r) for r in range(n) for l in graph.neighbors_r(r)}
    if from_l != from_r:
        raise ParameterError("adjacency is not symmetric across sides")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _bernoulli_coordinates(m: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted positions of iid Bernoulli(p) successes over 0..m-1.

    Uses geometric gap jumps, so the cost is O(successes) rather than O(m);
    with m = n^2 cells a per-cell draw is infeasible at experiment scale.
    """
    if p <= 0.0:
        return np.empty(0, dtype=np.int64)
    expected = m * p
    batch = max(int(expected + 6.0 * np.sqrt(expected + 1.0)) + 16, 16)
    pos = -1
    chunks = []
    while pos < m:
        gaps = rng.geometric(p, size=batch)
        steps = np.cumsum(gaps) + pos
        chunks.append(steps)
        pos = int(steps[-1])
    coords = np.concatenate(chunks)
    return coords[coords < m]


def sample_bipartite_graph(n: int, d: float, seed: RandomSeed) -> BipartiteGraph:
    """Sample the random bipartite graph with each L-R pair present independently
    with probability d/n, deterministically given (n, d, seed)."""
    if n <= 0:
        raise ParameterError(f"n must be positive, got {n}")
    if not (0.0 < d < n):
        raise ParameterError(f"d must satisfy 0 < d < n (edge probability d/n in (0,1)), got d={d}, n={n}")
    rng = seed.generator(GRAPH_DRAW)
    coords = _bernoulli_coordinates(n * n, d / n, rng)
    return BipartiteGraph(n, coords)


# ---------------------------------------------------------------------------
# Neighborhoods (rooted balls)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Neighborhood:
    """The radius-s ball around a root, as a rooted induced subgraph.

    Local vertex 0 is the root. ``global_indices`` maps local vertices to
    positions in the host graph's length-2n vertex order; it is None for
    synthetic balls (offspring trees) with no host graph.
    """

    root_side: Side
    vertex_ids: tuple[VertexId, ...]
    adj: tuple[tuple[int, ...], ...]
    depths: tuple[int, ...]
    global_indices: np.ndarray | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)

    def root_neighbors(self) -> tuple[int, ...]:
        return self.adj[0]


def neighborhood(graph: BipartiteGraph, v: VertexId, radius: int) -> Neighborhood:
    """BFS ball of graph-distance <= radius around v, with induced edges."""
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    if not (0 <= v.index < graph.n):
        raise ParameterError(f"vertex {v} out of range for n={graph.n}")
    local = {(v.side, v.index): 0}
    order = [(v.side, v.index)]
    depths = [0]
    frontier = [(v.side, v.index)]
    for depth in range(1, radius + 1):
        nxt = []
        for side, idx in frontier:
            nbrs = graph.neighbors_l(idx) if side is Side.L else graph.neighbors_r(idx)
            for u in nbrs:
                key = (side.other(), int(u))
                if key not in local:
                    local[key] = len(order)
                    order.append(key)
                    depths.append(depth)
                    nxt.append(key)
        frontier = nxt
    adj: list[list[int]] = [[] for _ in order]
    for side, idx in order:
        a = local[(side, idx)]
        nbrs = graph.neighbors_l(idx) if side is Side.L else graph.neighbors_r(idx)
        for u in nbrs:
            key = (side.other(), int(u))
            if key in local:
                adj[a].append(local[key])
    vertex_ids = tuple(VertexId(side, idx) for side, idx in order)
    gidx = np.array([vid.global_index(graph.n) for vid in vertex_ids], dtype=np.int64)
    return Neighborhood(
        root_side=v.side,
        vertex_ids=vertex_ids,
        adj=tuple(tuple(sorted(a)) for a in adj),
        depths=tuple(depths),
        global_indices=gidx,
    )


# ---------------------------------------------------------------------------
# Text serialization: header "n m", then m lines "l r" (0-based, row-major)
# ---------------------------------------------------------------------------


def graph_to_text(graph: BipartiteGraph) -> str:
    buf = io.StringIO()
    buf.write(f"{graph.n} {graph.edge_count}\n")
    for l, r in zip(graph.el, graph.er):
        buf.write(f"{l} {r}\n")
    return buf.getvalue()


def write_graph_text(graph: BipartiteGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph_to_text(graph))


def graph_from_text(text: str) -> BipartiteGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParameterError(f"malformed header line: {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise ParameterError(f"header promises {m} edges, file has {len(lines) - 1}")
    pairs = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ParameterError(f"malformed edge line: {ln!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return BipartiteGraph.from_edges(n, pairs)


def read_graph_text(path) -> BipartiteGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_text(fh.read())
