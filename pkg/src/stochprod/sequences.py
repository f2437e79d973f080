"""Generative models for random index sequences over a finite matrix set.

A model produces the index process behind a random matrix sequence
``W(k) = F[y_k]``.  Three variants cover the experiments here:

* ``IIDModel`` draws indices independently with fixed weights;
* ``MarkovModulatedModel`` runs a finite Markov chain over indices;
* ``ScriptedModel`` replays an explicit index list, repeated cyclically.

Sampling is deterministic given ``(model, seed)``; independent Monte Carlo
trials perturb the stream with ``seed ^ trial``.  Besides sampling, the
models answer *exact* probability queries for classification events of
length-h window products, by enumerating positive-probability words.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import graphs, matrices
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    InvalidDistribution,
    Reducible,
)
from .matrices import StochasticMatrix

__all__ = [
    "FiniteMatrixSet",
    "SequenceModel",
    "IIDModel",
    "MarkovModulatedModel",
    "ScriptedModel",
    "SampledSequence",
    "sample",
    "window_class_probability",
    "window_starts",
    "stationary_distribution",
    "min_positive_entry",
    "trial_seed",
]

ENUMERATION_LIMIT = 10**7
DIST_TOL = 1e-12

_PATTERN_TESTS = {
    "scrambling": matrices.pattern_is_scrambling,
    "sia": matrices.pattern_is_sia,
    "markov": matrices.pattern_is_markov,
}


def trial_seed(seed: int, trial: int) -> int:
    """Stream-split rule: Monte Carlo trial t runs on ``seed ^ t``."""
    return int(seed) ^ int(trial)


@dataclass(frozen=True)
class FiniteMatrixSet:
    """The finite set of stochastic matrices a sequence draws from."""

    matrices: tuple
    labels: tuple = ()

    def __post_init__(self):
        mats = tuple(
            m if isinstance(m, StochasticMatrix) else StochasticMatrix(m)
            for m in self.matrices)
        if not mats:
            raise DimensionMismatch("a matrix set needs at least one matrix")
        n = mats[0].n
        if any(m.n != n for m in mats):
            raise DimensionMismatch("all matrices in a set must share dimensions")
        labels = tuple(self.labels) or tuple(f"M{i}" for i in range(len(mats)))
        if len(labels) != len(mats):
            raise DimensionMismatch("one label per matrix")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.matrices)

    @property
    def dimension(self) -> int:
        return self.matrices[0].n

    def entry_arrays(self) -> list:
        return [m.entries for m in self.matrices]

    def patterns(self) -> list:
        return [m.pattern() for m in self.matrices]


def _check_distribution(vec, what: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidDistribution(f"{what} must be a nonempty vector")
    if np.any(v < 0):
        raise InvalidDistribution(f"{what} has a negative entry")
    if abs(v.sum() - 1.0) > DIST_TOL:
        raise InvalidDistribution(f"{what} sums to {v.sum()}, expected 1")
    v.flags.writeable = False
    return v


class SequenceModel:
    """Common interface of the index-process models.

    Subclasses implement ``num_symbols``, ``sample_indices`` and the two
    distribution hooks used for exact enumeration: ``start_distribution(k)``
    (law of the index at position k+1) and ``step_distribution(prev)`` (law
    of the next index given the previous one).
    """

    seed: int
    matrix_set: FiniteMatrixSet | None

    @property
    def num_symbols(self) -> int:
        raise NotImplementedError

    def sample_indices(self, length: int, trial: int = 0) -> np.ndarray:
        raise NotImplementedError

    def start_distribution(self, start: int) -> np.ndarray:
        raise NotImplementedError

    def step_distribution(self, prev: int) -> np.ndarray:
        raise NotImplementedError

    def is_stationary(self, tol: float = 1e-9) -> bool:
        """Whether the index process law is invariant under time shift."""
        raise NotImplementedError

    def _require_set(self) -> FiniteMatrixSet:
        if self.matrix_set is None:
            raise InvalidDistribution("this model carries no matrix set")
        if len(self.matrix_set) < self.num_symbols:
            raise DimensionMismatch(
                f"model uses {self.num_symbols} symbols but the set has "
                f"{len(self.matrix_set)} matrices")
        return self.matrix_set


@dataclass(frozen=True)
class IIDModel(SequenceModel):
    """Indices drawn independently with fixed weights."""

    weights: np.ndarray
    seed: int = 0
    matrix_set: FiniteMatrixSet | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_distribution(self.weights, "weights"))

    @property
    def num_symbols(self) -> int:
        return self.weights.size

    def sample_indices(self, length, trial=0):
        rng = np.random.default_rng(trial_seed(self.seed, trial))
        return rng.choice(self.num_symbols, size=int(length), p=self.weights)

    def start_distribution(self, start):
        return self.weights

    def step_distribution(self, prev):
        return self.weights

    def is_stationary(self, tol: float = 1e-9) -> bool:
        return True


@dataclass(frozen=True)
class MarkovModulatedModel(SequenceModel):
    """Indices follow a finite Markov chain: y_1 ~ initial, then each step
    moves by the transition matrix."""

    initial: np.ndarray
    transition: np.ndarray
    seed: int = 0
    matrix_set: FiniteMatrixSet | None = None

    def __post_init__(self):
        v = _check_distribution(self.initial, "initial distribution")
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] != v.size:
            raise InvalidDistribution("transition matrix shape mismatch")
        for i in range(t.shape[0]):
            _check_distribution(t[i], f"transition row {i}")
        t.flags.writeable = False
        object.__setattr__(self, "initial", v)
        object.__setattr__(self, "transition", t)

    @property
    def num_symbols(self) -> int:
        return self.initial.size

    def sample_indices(self, length, trial=0):
        rng = np.random.default_rng(trial_seed(self.seed, trial))
        length = int(length)
        cum_rows = np.cumsum(self.transition, axis=1)
        u = rng.random(length)
        out = np.empty(length, dtype=np.int64)
        state = int(np.searchsorted(np.cumsum(self.initial), u[0], side="right"))
        state = min(state, self.num_symbols - 1)
        out[0] = state
        for k in range(1, length):
            state = int(np.searchsorted(cum_rows[state], u[k], side="right"))
            state = min(state, self.num_symbols - 1)
            out[k] = state
        return out

    def marginal(self, k: int) -> np.ndarray:
        """Law of the index at position k+1 (k steps after the initial)."""
        v = self.initial.copy()
        for _ in range(int(k)):
            v = v @ self.transition
        return v

    def start_distribution(self, start):
        return self.marginal(start)

    def step_distribution(self, prev):
        return self.transition[int(prev)]

    def is_stationary(self, tol: float = 1e-9) -> bool:
        return bool(np.abs(self.initial @ self.transition - self.initial).max() <= tol)

    def stationary_start(self) -> "MarkovModulatedModel":
        """Same chain restarted from its stationary distribution."""
        return MarkovModulatedModel(
            initial=stationary_distribution(self.transition),
            transition=self.transition,
            seed=self.seed,
            matrix_set=self.matrix_set,
        )


@dataclass(frozen=True)
class ScriptedModel(SequenceModel):
    """A fixed index list, replayed cyclically for longer samples."""

    indices: tuple
    seed: int = 0
    matrix_set: FiniteMatrixSet | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise InvalidDistribution("a script needs at least one index")
        if any(i < 0 for i in idx):
            raise InvalidDistribution("script indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    @property
    def num_symbols(self) -> int:
        return max(self.indices) + 1

    @property
    def period(self) -> int:
        return len(self.indices)

    def sample_indices(self, length, trial=0):
        length = int(length)
        reps = -(-length // len(self.indices))
        return np.tile(np.asarray(self.indices, dtype=np.int64), reps)[:length]

    def scripted_word(self, start: int, h: int) -> tuple:
        return tuple(self.indices[(start + t) % len(self.indices)] for t in range(h))

    def start_distribution(self, start):
        d = np.zeros(self.num_symbols)
        d[self.indices[int(start) % len(self.indices)]] = 1.0
        return d

    def step_distribution(self, prev):
        raise InvalidDistribution(
            "a scripted model has position-dependent steps; query whole windows")

    def is_stationary(self, tol: float = 1e-9) -> bool:
        return len(set(self.indices)) == 1


@dataclass(frozen=True)
class SampledSequence:
    """A realized index sequence, reproducible from (model, seed, trial)."""

    indices: np.ndarray
    model: SequenceModel
    seed: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size


def sample(model: SequenceModel, length: int, trial: int = 0) -> SampledSequence:
    """Draw a length-``length`` index sequence; same (model, trial) => same draw."""
    if length < 1:
        raise InvalidDistribution("length must be at least 1")
    idx = model.sample_indices(length, trial=trial)
    return SampledSequence(indices=idx, model=model, seed=trial_seed(model.seed, trial))


def window_class_probability(model: SequenceModel, start: int, h: int,
                             klass: str) -> float:
    """Exact probability that the window product is in a matrix class.

    The event is about the backward product of the h matrices at positions
    start+1 .. start+h; membership in {scrambling, sia, markov} depends only
    on the boolean pattern, so the enumeration walks positive-probability
    words accumulating boolean pattern products.
    """
    if klass not in _PATTERN_TESTS:
        raise InvalidDistribution(f"unknown class {klass!r}")
    if h < 1:
        raise InvalidDistribution("window length must be at least 1")
    fset = model._require_set()
    m = model.num_symbols
    if m**h > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"{m}^{h} words exceed {ENUMERATION_LIMIT}")
    test = _PATTERN_TESTS[klass]
    pats = [p.astype(np.int32) for p in fset.patterns()]

    if isinstance(model, ScriptedModel):
        word = model.scripted_word(start, h)
        mask = pats[word[0]]
        for idx in word[1:]:
            mask = ((pats[idx] @ mask) > 0).astype(np.int32)
        return 1.0 if test(mask > 0) else 0.0

    first = model.start_distribution(start)
    total = 0.0
    # depth-first over words, pruning zero-probability branches; the running
    # value is the boolean pattern of the backward product so far
    stack = [(prob, sym, pats[sym], 1)
             for sym, prob in enumerate(first) if prob > 0]
    while stack:
        prob, prev, mask, depth = stack.pop()
        if depth == h:
            if test(mask > 0):
                total += prob
            continue
        nxt = model.step_distribution(prev)
        for sym, p in enumerate(nxt):
            if p > 0:
                stack.append(
                    (prob * p, sym, ((pats[sym] @ mask) > 0).astype(np.int32),
                     depth + 1))
    return float(total)


def window_starts(model: SequenceModel, horizon: int = 128) -> list:
    """Window starts covering one period of the model's marginal law.

    Scripted models cycle with their script length; i.i.d. and stationary
    Markov-modulated models are homogeneous, so one start suffices.  A
    non-stationary Markov-modulated model gets its marginals tracked until
    they repeat or settle within 1e-13, which covers periodic and converging
    modulating chains alike.
    """
    if isinstance(model, ScriptedModel):
        return list(range(model.period))
    if isinstance(model, MarkovModulatedModel) and not model.is_stationary(1e-12):
        seen = [model.initial]
        starts = [0]
        v = model.initial
        for k in range(1, int(horizon) + 1):
            v = v @ model.transition
            if any(np.abs(v - u).max() < 1e-13 for u in seen):
                break
            seen.append(v)
            starts.append(k)
        return starts
    return [0]


def stationary_distribution(transition) -> np.ndarray:
    """Unique stationary row vector of an irreducible transition matrix.

    Uses damped power iteration (on (P + I)/2, which shares the stationary
    vector and converges even for periodic chains) until the residual on the
    original matrix drops below 1e-13.
    """
    p = StochasticMatrix(transition).entries
    n = p.shape[0]
    count, _ = graphs.strongly_connected_components(p > 0)
    if count != 1:
        raise Reducible("transition matrix is reducible")
    v = np.full(n, 1.0 / n)
    for _ in range(200000):
        v = 0.5 * (v + v @ p)
        v /= v.sum()
        if np.abs(v @ p - v).max() < 1e-13:
            return v
    raise Reducible("power iteration failed to reach the 1e-13 residual")


def min_positive_entry(fset: FiniteMatrixSet) -> float:
    """Uniform lower bound over all positive entries of all set members."""
    best = np.inf
    for a in fset.entry_arrays():
        pos = a[a > 0]
        if pos.size:
            best = min(best, float(pos.min()))
    return best if np.isfinite(best) else 1.0
