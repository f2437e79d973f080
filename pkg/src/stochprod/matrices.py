"""Row-stochastic matrices, their zero patterns, and classification.

The central quantity is the coefficient of ergodicity

    tau(A) = 1 - min_{i,j} sum_s min(a_is, a_js),

which is 0 exactly when all rows of A agree and is < 1 exactly when A is
scrambling (no two rows have disjoint supports).  Classification is done on
the strict zero pattern of the stored entries: the matrix classes

    markov  (some column strictly positive)
  > scrambling  (every pair of rows shares a positive column)
  > sia  (powers converge to a matrix with identical rows)

are nested, and membership depends only on the pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import graphs
from .errors import DimensionMismatch, EmptySequence, NegativeEntry, RowSumViolation

__all__ = [
    "ROW_SUM_TOL",
    "StochasticMatrix",
    "MatrixPattern",
    "MatrixClass",
    "validate",
    "entries_of",
    "pattern_of",
    "tau",
    "spread",
    "is_scrambling",
    "is_markov",
    "is_sia",
    "pattern_period",
    "scrambling_index",
    "same_type",
    "classify",
    "backward_product",
    "pattern_is_scrambling",
    "pattern_is_markov",
    "pattern_is_sia",
    "pattern_cycle_length",
]

ROW_SUM_TOL = 1e-12


class StochasticMatrix:
    """A validated row-stochastic matrix.

    Entries are nonnegative and every row sums to 1 within ``ROW_SUM_TOL``.
    Instances are immutable; the entry array is stored read-only.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square array, got shape {a.shape}")
        neg = np.argwhere(a < 0)
        if len(neg):
            i, j = map(int, neg[0])
            raise NegativeEntry(i, j, float(a[i, j]))
        sums = a.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if len(bad):
            raise RowSumViolation(int(bad[0]), float(sums[bad[0]]))
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    def __setattr__(self, name, value):
        raise AttributeError("StochasticMatrix is immutable")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def pattern(self) -> np.ndarray:
        """Boolean mask of strictly positive entries."""
        return self.entries > 0

    def __repr__(self):
        return f"StochasticMatrix({self.entries.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.all(self.entries == other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())


def validate(entries) -> StochasticMatrix:
    """Validate a square array as a stochastic matrix.

    Raises ``NegativeEntry`` or ``RowSumViolation`` with the offending index.
    """
    return StochasticMatrix(entries)


def entries_of(matrix) -> np.ndarray:
    """Raw entry array of a StochasticMatrix or any array-like."""
    return np.asarray(getattr(matrix, "entries", matrix), dtype=float)


def pattern_of(matrix) -> np.ndarray:
    """Strict positivity mask of a matrix or array-like."""
    return entries_of(matrix) > 0


@dataclass(frozen=True)
class MatrixPattern:
    """The zero/positive pattern of a matrix."""

    n: int
    mask: np.ndarray

    @classmethod
    def of(cls, matrix) -> "MatrixPattern":
        mask = pattern_of(matrix)
        mask.flags.writeable = False
        return cls(mask.shape[0], mask)

    def __eq__(self, other):
        if not isinstance(other, MatrixPattern):
            return NotImplemented
        return self.n == other.n and bool(np.all(self.mask == other.mask))

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))


@dataclass(frozen=True)
class MatrixClass:
    """Classification result of a single stochastic matrix.

    For irreducible matrices the usual inclusions hold: markov implies
    scrambling implies sia, and a pattern period above 1 excludes sia.  A
    reducible matrix whose transient part is periodic can be sia and still
    have ``period > 1``; the closed part alone decides sia membership.
    """

    is_scrambling: bool
    is_sia: bool
    is_markov: bool
    period: int


def tau(matrix) -> float:
    """Coefficient of ergodicity: 1 minus the worst row-pair overlap."""
    a = entries_of(matrix)
    n = a.shape[0]
    if n == 1:
        return 0.0
    # min over unordered row pairs of sum_s min(a_is, a_js); one row at a
    # time keeps memory at O(n^2) for the few-hundred sizes used here.
    worst = np.inf
    for i in range(n - 1):
        overlaps = np.minimum(a[i], a[i + 1:]).sum(axis=1)
        worst = min(worst, float(overlaps.min()))
    return min(max(1.0 - worst, 0.0), 1.0)


def spread(x) -> float:
    """Max component minus min component of a nonempty vector."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptySequence("spread of an empty vector")
    return float(x.max() - x.min())


def pattern_is_scrambling(mask: np.ndarray) -> bool:
    """Every pair of rows shares a column where both are positive."""
    m = np.asarray(mask, dtype=bool)
    share = m.astype(np.int32) @ m.astype(np.int32).T
    return bool(np.all(share > 0))


def pattern_is_markov(mask: np.ndarray) -> bool:
    """Some column is positive in every row."""
    return bool(np.asarray(mask, dtype=bool).all(axis=0).any())


def pattern_is_sia(mask: np.ndarray) -> bool:
    """Powers converge to identical rows: there is exactly one closed
    strongly connected class and it is aperiodic.

    The walk digraph here has an edge i -> j when entry (i, j) is positive.
    """
    adj = np.asarray(mask, dtype=bool)
    closed, labels = graphs.closed_components(adj)
    if len(closed) != 1:
        return False
    members = np.nonzero(labels == closed[0])[0]
    return graphs.component_period(adj, members) == 1


def pattern_cycle_length(mask: np.ndarray, return_preperiod: bool = False):
    """Cycle length of the sequence of boolean pattern powers.

    The pattern of A^k is the k-th boolean power of A's pattern; the sequence
    lives in a finite set so it is eventually periodic.  Returns the exact
    cycle length (1 means the powers' pattern eventually stops changing).
    """
    m = np.asarray(mask, dtype=bool).astype(np.int32)
    step = m
    seen = {}
    k = 1
    current = m
    while True:
        key = (current > 0).tobytes()
        if key in seen:
            cycle = k - seen[key]
            if return_preperiod:
                return cycle, seen[key]
            return cycle
        seen[key] = k
        current = ((current @ step) > 0).astype(np.int32)
        k += 1


def is_scrambling(matrix) -> bool:
    return pattern_is_scrambling(pattern_of(matrix))


def is_markov(matrix) -> bool:
    return pattern_is_markov(pattern_of(matrix))


def is_sia(matrix) -> bool:
    return pattern_is_sia(pattern_of(matrix))


def pattern_period(matrix) -> int:
    """Cycle length of the matrix's pattern powers (1 = eventually fixed)."""
    return pattern_cycle_length(pattern_of(matrix))


def scrambling_index(matrix, max_power: int | None = None):
    """Smallest m with the m-th pattern power scrambling, or None.

    Any product of m stochastic matrices of this matrix's type is scrambling
    exactly when the m-th boolean pattern power is.  The search walks pattern
    powers until a repeat proves no power is ever scrambling.
    """
    base = pattern_of(matrix).astype(np.int32)
    current = base
    seen = set()
    m = 1
    while True:
        if pattern_is_scrambling(current > 0):
            return m
        key = (current > 0).tobytes()
        if key in seen:
            return None
        seen.add(key)
        if max_power is not None and m >= max_power:
            return None
        current = ((current @ base) > 0).astype(np.int32)
        m += 1


def same_type(a, b) -> bool:
    """True when two matrices have zero entries in the same positions."""
    pa, pb = pattern_of(a), pattern_of(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch(f"patterns of shape {pa.shape} vs {pb.shape}")
    return bool(np.all(pa == pb))


def classify(matrix) -> MatrixClass:
    mask = pattern_of(matrix)
    return MatrixClass(
        is_scrambling=pattern_is_scrambling(mask),
        is_sia=pattern_is_sia(mask),
        is_markov=pattern_is_markov(mask),
        period=pattern_cycle_length(mask),
    )


def backward_product(matrices) -> StochasticMatrix:
    """Product of a chronological list with later factors on the left.

    ``backward_product([W1, W2, ..., Wk])`` returns ``Wk @ ... @ W2 @ W1``.
    """
    arrays = [entries_of(m) for m in matrices]
    if not arrays:
        raise EmptySequence("backward product of an empty sequence")
    n = arrays[0].shape[0]
    for a in arrays:
        if a.shape != (n, n):
            raise DimensionMismatch("matrices in a product must share dimensions")
    prod = reduce(lambda acc, nxt: nxt @ acc, arrays[1:], arrays[0])
    return StochasticMatrix(prod)
