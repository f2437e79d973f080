"""Asynchronous agreement over possibly periodic averaging networks.

Synchronous iteration with a periodic weight matrix (zero diagonal) never
settles: the state just rotates.  When agents instead wake up on independent
random clocks and only the awake agents replace their rows of the identity
with their rows of W, the realized update-matrix products pick up strictly
positive columns along *hierarchical* activation orders (root first, then
each BFS level of a spanning tree), and agreement is reached almost surely
exactly when the network is rooted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import graphs as graphlib
from . import matrices
from .errors import EmptyActivation, InvalidDistribution, NotReachable
from .graphs import DirectedGraph
from .matrices import StochasticMatrix
from .sequences import trial_seed

__all__ = [
    "AsyncClockModel",
    "BernoulliClocks",
    "PoissonClocks",
    "UpdateEvent",
    "AgreementTrace",
    "HierarchicalPartition",
    "async_update_matrix",
    "hierarchical_partition",
    "hierarchical_sequence",
    "hierarchical_product",
    "hierarchical_word_count",
    "simulate_async",
]


class AsyncClockModel:
    """Per-agent activation clocks, mutually independent streams."""

    seed: int

    def activation_probabilities(self) -> np.ndarray:
        """Probability that each agent fires on a given tick."""
        raise NotImplementedError


@dataclass(frozen=True)
class BernoulliClocks(AsyncClockModel):
    """Each tick, agent i fires independently with probability rates[i]."""

    rates: np.ndarray
    seed: int = 0

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        if np.any(r <= 0) or np.any(r > 1):
            raise InvalidDistribution("Bernoulli rates must lie in (0, 1]")
        r.flags.writeable = False
        object.__setattr__(self, "rates", r)

    def activation_probabilities(self):
        return self.rates


@dataclass(frozen=True)
class PoissonClocks(AsyncClockModel):
    """Poisson clocks thinned onto a tick grid of width ``delta``: the
    per-tick firing probability is 1 - exp(-rate * delta)."""

    rates: np.ndarray
    seed: int = 0
    delta: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        if np.any(r <= 0):
            raise InvalidDistribution("Poisson intensities must be positive")
        if self.delta <= 0:
            raise InvalidDistribution("tick width must be positive")
        r.flags.writeable = False
        object.__setattr__(self, "rates", r)

    def activation_probabilities(self):
        return 1.0 - np.exp(-self.rates * self.delta)


@dataclass(frozen=True)
class UpdateEvent:
    """One event tick: the nonempty set of agents that updated."""

    k: int
    activated: frozenset


@dataclass(frozen=True)
class AgreementTrace:
    """Spread history of an asynchronous run; spreads[k] is after event k,
    with spreads[0] the initial disagreement."""

    spreads: tuple
    final_x: np.ndarray
    events: tuple
    seed: int


def async_update_matrix(W, activated) -> StochasticMatrix:
    """Update matrix of one event: identity rows everywhere except the
    activated agents, whose rows come from W."""
    w = matrices.entries_of(W)
    agents = sorted(set(int(i) for i in activated))
    if not agents:
        raise EmptyActivation("at least one agent must activate")
    out = np.eye(w.shape[0])
    out[agents] = w[agents]
    return StochasticMatrix(out)


@dataclass(frozen=True)
class HierarchicalPartition:
    """BFS levels of a spanning tree from a root: level r holds the vertices
    at tree distance r, and each vertex's parent sits one level up."""

    root: int
    levels: tuple
    parent: dict

    @property
    def n(self) -> int:
        return sum(len(level) for level in self.levels)


def hierarchical_partition(graph: DirectedGraph, root: int) -> HierarchicalPartition:
    """Partition the vertices by BFS distance from ``root``.

    Parents are tie-broken to the lowest-index candidate, making the
    spanning tree deterministic.  Raises ``NotReachable`` when the root does
    not reach some vertex.
    """
    adj = graphlib.adjacency(graph)
    dist = graphlib.bfs_levels(adj, int(root))
    missing = np.nonzero(dist < 0)[0]
    if missing.size:
        raise NotReachable(int(missing[0]))
    depth = int(dist.max())
    levels = tuple(
        tuple(int(v) for v in np.nonzero(dist == r)[0]) for r in range(depth + 1))
    parent = {}
    for r in range(1, depth + 1):
        for v in levels[r]:
            candidates = [u for u in levels[r - 1] if adj[u, v]]
            parent[v] = min(candidates)
    return HierarchicalPartition(root=int(root), levels=levels, parent=parent)


def hierarchical_sequence(partition: HierarchicalPartition) -> tuple:
    """One hierarchical activation order: the levels in sequence, each in
    ascending vertex order (any within-level order works)."""
    return tuple(v for level in partition.levels for v in sorted(level))


def hierarchical_product(W, seq) -> StochasticMatrix:
    """Product of the single-agent update matrices along an activation order
    (first activation applied first).  For a hierarchical order on a rooted
    network the result has a strictly positive column."""
    return matrices.backward_product(
        [async_update_matrix(W, {a}) for a in seq])


def hierarchical_word_count(partition: HierarchicalPartition) -> int:
    """Number of hierarchical activation words for this partition: the
    levels must appear in order, each in any internal order."""
    count = 1
    for level in partition.levels:
        count *= math.factorial(len(level))
    return count


def simulate_async(W, clocks: AsyncClockModel, x0, steps: int, trial: int = 0,
                   record_events: bool = True) -> AgreementTrace:
    """Run ``steps`` asynchronous update events.

    Each tick samples the set of firing agents from the clocks; ticks where
    nobody fires are skipped (no event happens, no time passes in the
    event-indexed system).  All agents firing at once apply their rows
    simultaneously.
    """
    w = matrices.entries_of(W)
    n = w.shape[0]
    probs = clocks.activation_probabilities()
    if probs.shape != (n,):
        raise InvalidDistribution("one activation probability per agent")
    rng = np.random.default_rng(trial_seed(clocks.seed, trial))
    x = np.asarray(x0, dtype=float).copy()
    spreads = [matrices.spread(x)]
    events = []
    done = 0
    while done < steps:
        fired = np.nonzero(rng.random(n) < probs)[0]
        if fired.size == 0:
            continue
        x[fired] = w[fired] @ x
        done += 1
        spreads.append(matrices.spread(x))
        if record_events:
            events.append(UpdateEvent(k=done, activated=frozenset(int(i) for i in fired)))
    return AgreementTrace(
        spreads=tuple(spreads),
        final_x=x,
        events=tuple(events),
        seed=trial_seed(clocks.seed, trial),
    )
