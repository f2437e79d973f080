"""Directed graphs on vertices 0..n-1 and the graph view of a stochastic matrix.

The edge convention throughout the package: ``(i, j)`` is an edge when agent j
draws weight from agent i, i.e. for a weight matrix W the graph has edge
``(i, j)`` exactly when ``W[j, i] > 0``.  Information therefore flows along
edges, and a *root* is a vertex whose value can influence every other vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionMismatch

__all__ = [
    "DirectedGraph",
    "graph_of",
    "adjacency",
    "compose",
    "is_strongly_connected",
    "is_rooted",
    "roots",
    "has_all_self_loops",
    "strongly_connected_components",
    "closed_components",
    "component_period",
    "bfs_levels",
]


@dataclass(frozen=True)
class DirectedGraph:
    """A directed graph with vertex set {0, ..., n-1} and an edge set of
    ordered pairs."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(map(tuple, self.edges)))
        for (i, j) in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DimensionMismatch(
                    f"edge ({i}, {j}) outside vertex range 0..{self.n - 1}")

    @classmethod
    def from_adjacency(cls, adj) -> "DirectedGraph":
        adj = np.asarray(adj, dtype=bool)
        ii, jj = np.nonzero(adj)
        return cls(adj.shape[0], frozenset(zip(ii.tolist(), jj.tolist())))

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def out_neighbors(self, i: int) -> list:
        return sorted(j for (a, j) in self.edges if a == i)

    def in_neighbors(self, j: int) -> list:
        return sorted(i for (i, b) in self.edges if b == j)


def _matrix_entries(matrix) -> np.ndarray:
    return np.asarray(getattr(matrix, "entries", matrix), dtype=float)


def graph_of(matrix) -> DirectedGraph:
    """Graph of a weight matrix: edge (i, j) present when W[j, i] > 0."""
    w = _matrix_entries(matrix)
    return DirectedGraph.from_adjacency(w.T > 0)


def adjacency(graph: DirectedGraph) -> np.ndarray:
    """Boolean adjacency matrix, adj[i, j] true when (i, j) is an edge."""
    adj = np.zeros((graph.n, graph.n), dtype=bool)
    for (i, j) in graph.edges:
        adj[i, j] = True
    return adj


def compose(g2: DirectedGraph, g1: DirectedGraph) -> DirectedGraph:
    """Two-step composition: edge (i, j) when some i1 has (i, i1) in g1 and
    (i1, j) in g2."""
    if g1.n != g2.n:
        raise DimensionMismatch("composition needs equal vertex counts")
    prod = adjacency(g1).astype(np.int32) @ adjacency(g2).astype(np.int32)
    return DirectedGraph.from_adjacency(prod > 0)


def strongly_connected_components(adj: np.ndarray):
    """Component labels for a boolean adjacency matrix.

    Returns ``(count, labels)`` where labels[v] identifies v's strongly
    connected component.
    """
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    count, labels = connected_components(
        csr_matrix(adj), directed=True, connection="strong")
    return count, labels


def closed_components(adj: np.ndarray):
    """Indices of components with no edge leaving them.

    Returns ``(closed, labels)``: the list of closed component labels and the
    per-vertex labeling.  A component is closed when every edge from one of
    its vertices stays inside it.
    """
    adj = np.asarray(adj, dtype=bool)
    count, labels = strongly_connected_components(adj)
    leaves = np.zeros(count, dtype=bool)
    ii, jj = np.nonzero(adj)
    escaping = labels[ii] != labels[jj]
    np.logical_or.at(leaves, labels[ii[escaping]], True)
    return [c for c in range(count) if not leaves[c]], labels


def bfs_levels(adj: np.ndarray, root: int) -> np.ndarray:
    """BFS distance from ``root`` along edges; unreachable vertices get -1."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    level = np.full(n, -1, dtype=int)
    level[root] = 0
    frontier = [root]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in np.nonzero(adj[u])[0]:
                if level[v] < 0:
                    level[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return level

def component_period(adj: np.ndarray, vertices) -> int:
    """Period of a strongly connected vertex set: the gcd of its cycle lengths.

    Computed by BFS level arithmetic inside the component: the gcd of
    ``level[u] + 1 - level[v]`` over all internal edges (u, v).  A single
    vertex without a self-loop has no cycles; its period is defined as 1.
    """
    vertices = sorted(vertices)
    sub = np.asarray(adj, dtype=bool)[np.ix_(vertices, vertices)]
    k = len(vertices)
    if k == 1:
        return 1  # trivial component; a self-loop also gives gcd 1
    level = bfs_levels(sub, 0)
    g = 0
    for u in range(k):
        for v in np.nonzero(sub[u])[0]:
            g = math.gcd(g, level[u] + 1 - level[int(v)])
    return abs(g) if g != 0 else 1


def is_strongly_connected(graph: DirectedGraph) -> bool:
    count, _ = strongly_connected_components(adjacency(graph))
    return count <= 1


def roots(graph: DirectedGraph) -> list:
    """Vertices from which every other vertex can be reached.

    Nonempty exactly when the condensation of the graph has a single source
    component; the roots are that component's vertices.
    """
    adj = adjacency(graph)
    count, labels = strongly_connected_components(adj)
    if count == 0:
        return []
    entered = np.zeros(count, dtype=bool)
    ii, jj = np.nonzero(adj)
    crossing = labels[ii] != labels[jj]
    np.logical_or.at(entered, labels[jj[crossing]], True)
    sources = np.nonzero(~entered)[0]
    if len(sources) != 1:
        return []
    return [v for v in range(graph.n) if labels[v] == sources[0]]


def is_rooted(graph: DirectedGraph) -> bool:
    """True when some vertex reaches all others."""
    return bool(roots(graph))


def has_all_self_loops(graph: DirectedGraph) -> bool:
    return all((v, v) in graph.edges for v in range(graph.n))
