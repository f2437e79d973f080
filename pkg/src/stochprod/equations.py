"""Distributed solving of consistent linear systems over random graph
sequences.

Each of n agents holds one block (A_i, b_i) of a consistent stacked system
``A x = b`` and an estimate satisfying its own block exactly.  At every step
agents average their in-neighbors' estimates (self-arcs included) and
project the correction onto the kernel of their own block:

    x_i <- x_i - (1/d_i) P_i (d_i x_i - sum_{j in N_i} x_j).

Feasibility ``A_i x_i = b_i`` is preserved, the error system contracts in a
mixed block norm (spectral norms of blocks collapsed by the max row sum),
and the estimates agree on a common solution almost surely as long as the
window composition of the random neighbor graphs is strongly connected with
positive probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import graphs as graphlib
from . import sequences
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    InconsistentBlock,
    InconsistentSystem,
    InvalidDistribution,
    MissingSelfArc,
    NoConnectedWindow,
)
from .graphs import DirectedGraph
from .sequences import SequenceModel

__all__ = [
    "PartitionedLinearSystem",
    "ProjectionSet",
    "GraphSequenceModel",
    "SolverState",
    "SolverReport",
    "kernel_projection",
    "kernel_projections",
    "initial_estimate",
    "initial_state",
    "averaging_matrix",
    "step",
    "mixed_matrix_norm",
    "error_transition",
    "window_connectivity_probability",
    "run_solver",
    "smallest_contracting_window",
]

RANK_CUTOFF = 1e-12
CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class PartitionedLinearSystem:
    """Per-agent blocks (A_i, b_i) of a consistent stacked linear system."""

    blocks: tuple

    def __post_init__(self):
        cleaned = []
        m = None
        for a, b in self.blocks:
            a = np.array(a, dtype=float)
            b = np.array(b, dtype=float).reshape(-1)
            if a.ndim != 2 or a.shape[0] != b.size:
                raise DimensionMismatch("block shapes must match their right sides")
            if m is None:
                m = a.shape[1]
            elif a.shape[1] != m:
                raise DimensionMismatch("all blocks must share the unknown count")
            a.flags.writeable = False
            b.flags.writeable = False
            cleaned.append((a, b))
        if not cleaned:
            raise DimensionMismatch("a partitioned system needs at least one block")
        object.__setattr__(self, "blocks", tuple(cleaned))
        a_full, b_full = self.stacked()
        x, *_ = np.linalg.lstsq(a_full, b_full, rcond=None)
        if np.abs(a_full @ x - b_full).max() > CONSISTENCY_TOL:
            raise InconsistentSystem("the stacked system has no solution")

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def m(self) -> int:
        return self.blocks[0][0].shape[1]

    def stacked(self):
        a = np.concatenate([a for a, _ in self.blocks], axis=0)
        b = np.concatenate([b for _, b in self.blocks], axis=0)
        return a, b


def kernel_projection(block) -> np.ndarray:
    """Orthogonal projection onto the kernel of a block.

    Built as ``I - V^T V`` from an orthonormal row-space basis V, with
    singular values below ``RANK_CUTOFF`` times the largest treated as zero.
    The all-zero block projects onto everything (identity).
    """
    a = np.asarray(block, dtype=float)
    m = a.shape[1]
    if not np.any(a):
        return np.eye(m)
    _, s, vt = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > RANK_CUTOFF * s[0]))
    v = vt[:rank]
    return np.eye(m) - v.T @ v


@dataclass(frozen=True)
class ProjectionSet:
    """Validated kernel projections, one per agent."""

    projections: tuple

    def __post_init__(self):
        ps = []
        for p in self.projections:
            p = np.array(p, dtype=float)
            if np.abs(p - p.T).max() > 1e-10:
                raise InvalidDistribution("projection is not symmetric")
            if np.abs(p @ p - p).max() > 1e-10:
                raise InvalidDistribution("projection is not idempotent")
            p.flags.writeable = False
            ps.append(p)
        object.__setattr__(self, "projections", tuple(ps))

    def __len__(self):
        return len(self.projections)

    def block_diagonal(self) -> np.ndarray:
        m = self.projections[0].shape[0]
        n = len(self.projections)
        out = np.zeros((n * m, n * m))
        for i, p in enumerate(self.projections):
            out[i * m:(i + 1) * m, i * m:(i + 1) * m] = p
        return out


def kernel_projections(system: PartitionedLinearSystem) -> ProjectionSet:
    ps = ProjectionSet(tuple(kernel_projection(a) for a, _ in system.blocks))
    for (a, _), p in zip(system.blocks, ps.projections):
        if a.size and np.abs(a @ p).max() > 1e-10:
            raise InvalidDistribution("projection does not annihilate its block")
    return ps


def initial_estimate(block, rhs) -> np.ndarray:
    """Minimum-norm solution of one agent's equations."""
    a = np.asarray(block, dtype=float)
    b = np.asarray(rhs, dtype=float).reshape(-1)
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    if a.size and np.abs(a @ x - b).max() > 1e-10:
        raise InconsistentBlock("block equations admit no solution")
    return x


def initial_state(system: PartitionedLinearSystem) -> "SolverState":
    ests = np.stack([initial_estimate(a, b) for a, b in system.blocks])
    return SolverState(estimates=ests, iteration=0)


@dataclass(frozen=True)
class SolverState:
    """Stacked agent estimates (row i is agent i's current x_i)."""

    estimates: np.ndarray
    iteration: int

    def __post_init__(self):
        e = np.array(self.estimates, dtype=float)
        e.flags.writeable = False
        object.__setattr__(self, "estimates", e)


def _neighbor_structure(graph: DirectedGraph):
    """In-neighbor adjacency as floats plus in-degrees; requires self-arcs."""
    if not graphlib.has_all_self_loops(graph):
        raise MissingSelfArc("solver graphs must contain every self-arc")
    adj = graphlib.adjacency(graph)
    incoming = adj.T.astype(float)  # incoming[i, j] = 1 when j feeds i
    degrees = incoming.sum(axis=1)
    return incoming, degrees


def averaging_matrix(graph: DirectedGraph) -> np.ndarray:
    """Row-stochastic neighbor-averaging matrix: row i spreads weight 1/d_i
    over i's in-neighbors (self included)."""
    incoming, degrees = _neighbor_structure(graph)
    return incoming / degrees[:, None]


def step(state: SolverState, graph: DirectedGraph,
         projections: ProjectionSet) -> SolverState:
    """One synchronous round of the projected-averaging update."""
    incoming, degrees = _neighbor_structure(graph)
    x = state.estimates
    sums = incoming @ x
    corrections = degrees[:, None] * x - sums
    projected = np.einsum("ijk,ik->ij", np.stack(projections.projections),
                          corrections)
    return SolverState(estimates=x - projected / degrees[:, None],
                       iteration=state.iteration + 1)


def mixed_matrix_norm(q: np.ndarray, block_size: int) -> float:
    """Mixed block norm: spectral norm of each block, collapsed by the
    induced sup norm (max row sum of the block-norm matrix)."""
    q = np.asarray(q, dtype=float)
    if q.shape[0] != q.shape[1] or q.shape[0] % block_size:
        raise DimensionMismatch("block matrix shape incompatible with block size")
    n = q.shape[0] // block_size
    norms = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            block = q[i * block_size:(i + 1) * block_size,
                      j * block_size:(j + 1) * block_size]
            norms[i, j] = np.linalg.norm(block, 2)
    return float(norms.sum(axis=1).max())


def error_transition(graph_list, projections: ProjectionSet):
    """Transition operator of the error system over a graph window.

    For each graph the factor is ``P (W kron I) P`` with P the
    block-diagonal of the kernel projections and W the graph's averaging
    matrix; factors multiply chronologically with later graphs on the left.
    Returns (operator, its mixed norm); the norm never exceeds 1.
    """
    graph_list = list(graph_list)
    if not graph_list:
        raise DimensionMismatch("error transition over an empty window")
    m = projections.projections[0].shape[0]
    p = projections.block_diagonal()
    phi = np.eye(p.shape[0])
    for g in graph_list:
        w = averaging_matrix(g)
        phi = (p @ np.kron(w, np.eye(m)) @ p) @ phi
    return phi, mixed_matrix_norm(phi, m)


@dataclass(frozen=True)
class GraphSequenceModel:
    """A finite family of neighbor graphs (all with self-arcs) plus an index
    process selecting the graph used at each step, and the window length at
    which joint connectivity is probed."""

    graph_set: tuple
    model: SequenceModel
    window: int = 1

    def __post_init__(self):
        gs = tuple(self.graph_set)
        if not gs:
            raise DimensionMismatch("need at least one candidate graph")
        n = gs[0].n
        for g in gs:
            if g.n != n:
                raise DimensionMismatch("candidate graphs must share vertex count")
            if not graphlib.has_all_self_loops(g):
                raise MissingSelfArc("every candidate graph needs all self-arcs")
        if self.model.num_symbols > len(gs):
            raise DimensionMismatch("model indexes more graphs than provided")
        if self.window < 1:
            raise InvalidDistribution("window length must be at least 1")
        object.__setattr__(self, "graph_set", gs)

    @property
    def n(self) -> int:
        return self.graph_set[0].n

    def sample_graphs(self, length: int, trial: int = 0):
        idx = self.model.sample_indices(length, trial=trial)
        return [self.graph_set[i] for i in idx]


def window_connectivity_probability(gmodel: GraphSequenceModel,
                                    window: int | None = None) -> float:
    """Exact minimum over window starts of the probability that the window's
    graph composition is strongly connected."""
    h = int(window or gmodel.window)
    model = gmodel.model
    m = model.num_symbols
    if m**h > sequences.ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"{m}^{h} words exceed enumeration budget")
    adjs = [graphlib.adjacency(g).astype(np.int32) for g in gmodel.graph_set]

    def window_probability(start: int) -> float:
        if isinstance(model, sequences.ScriptedModel):
            word = model.scripted_word(start, h)
            comp = adjs[word[0]]
            for i in word[1:]:
                comp = ((comp @ adjs[i]) > 0).astype(np.int32)
            count, _ = graphlib.strongly_connected_components(comp > 0)
            return 1.0 if count == 1 else 0.0
        total = 0.0
        stack = [(p, s, adjs[s], 1)
                 for s, p in enumerate(model.start_distribution(start)) if p > 0]
        while stack:
            prob, prev, comp, depth = stack.pop()
            if depth == h:
                count, _ = graphlib.strongly_connected_components(comp > 0)
                if count == 1:
                    total += prob
                continue
            for s, p in enumerate(model.step_distribution(prev)):
                if p > 0:
                    stack.append(
                        (prob * p, s, ((comp @ adjs[s]) > 0).astype(np.int32),
                         depth + 1))
        return total

    return float(min(window_probability(s)
                     for s in sequences.window_starts(model)))


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one solver run; non-convergence is reported, not raised."""

    converged: bool
    iterations: int
    disagreement: float
    residual: float
    solution: np.ndarray
    history: tuple
    fitted_decay: float | None
    window_norms: tuple
    exponential_consistent: bool | None


def _disagreement(estimates: np.ndarray) -> float:
    return float((estimates.max(axis=0) - estimates.min(axis=0)).max())


def run_solver(system: PartitionedLinearSystem, gmodel: GraphSequenceModel,
               max_iters: int, tol: float = 1e-8, trial: int = 0,
               check_connectivity: bool = True, record_every: int = 1,
               norm_windows: int = 0) -> SolverReport:
    """Iterate the projected-averaging update along a sampled graph sequence.

    Stops once both the largest pairwise estimate gap and the stacked
    residual at the averaged estimate fall below ``tol``.  With
    ``norm_windows`` > 0 the first windows of the sampled sequence also get
    their error-transition mixed norms computed, giving a contraction
    estimate the fitted decay can be compared against.
    """
    if gmodel.n != system.n:
        raise DimensionMismatch("one graph vertex per agent")
    if check_connectivity:
        if window_connectivity_probability(gmodel) <= 0.0:
            raise NoConnectedWindow(
                f"no strongly connected window of length {gmodel.window}")
    projections = kernel_projections(system)
    a_full, b_full = system.stacked()
    state = initial_state(system)
    graph_seq = gmodel.sample_graphs(max_iters, trial=trial)

    def measure(st):
        mean = st.estimates.mean(axis=0)
        return (_disagreement(st.estimates),
                float(np.abs(a_full @ mean - b_full).max()))

    dis, res = measure(state)
    history = [(0, dis, res)]
    converged = dis < tol and res < tol
    k = 0
    while not converged and k < max_iters:
        state = step(state, graph_seq[k], projections)
        k += 1
        dis, res = measure(state)
        if k % record_every == 0 or dis < tol:
            history.append((k, dis, res))
        converged = dis < tol and res < tol

    window_norms = []
    if norm_windows > 0:
        width = gmodel.window * max(1, min(gmodel.n - 1, 8))
        for w in range(norm_windows):
            chunk = graph_seq[w * width:(w + 1) * width]
            if len(chunk) < width:
                break
            _, norm = error_transition(chunk, projections)
            window_norms.append(norm)

    fitted = None
    ks = np.asarray([h[0] for h in history], dtype=float)
    ds = np.asarray([h[1] for h in history], dtype=float)
    keep = ds > 1e-300
    if keep.sum() >= 3:
        slope = np.polyfit(ks[keep], np.log(ds[keep]), 1)[0]
        fitted = float(np.exp(slope))

    exponential_consistent = None
    if window_norms and fitted is not None:
        width = gmodel.window * max(1, min(gmodel.n - 1, 8))
        per_step = float(np.mean(window_norms)) ** (1.0 / width)
        exponential_consistent = fitted <= per_step + 1e-9

    return SolverReport(
        converged=bool(converged),
        iterations=k,
        disagreement=dis,
        residual=res,
        solution=state.estimates.mean(axis=0),
        history=tuple(history),
        fitted_decay=fitted,
        window_norms=tuple(window_norms),
        exponential_consistent=exponential_consistent,
    )


def smallest_contracting_window(gmodel: GraphSequenceModel,
                                projections: ProjectionSet, max_len: int,
                                trial: int = 0):
    """Empirically smallest window length whose sampled error transition has
    mixed norm strictly below 1; returns (length, norm) or None.

    The guaranteed window from the connectivity argument scales like
    ``(n-1)^2 * window``, but realized sequences usually contract much
    sooner.
    """
    graph_seq = gmodel.sample_graphs(max_len, trial=trial)
    m = projections.projections[0].shape[0]
    p = projections.block_diagonal()
    phi = np.eye(p.shape[0])
    for length, g in enumerate(graph_seq, start=1):
        phi = (p @ np.kron(averaging_matrix(g), np.eye(m)) @ p) @ phi
        norm = mixed_matrix_norm(phi, m)
        if norm < 1.0 - 1e-12:
            return length, norm
    return None
