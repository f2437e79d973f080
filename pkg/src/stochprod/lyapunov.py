"""Finite-horizon contraction certificates for randomly switched linear
systems.

For ``x_{k+1} = A[y_{k+1}] x_k`` with a random mode signal, a nonnegative
function V certifies exponential decay when its conditional expectation T
steps ahead contracts: ``E[V(x_{k+T}) | x_k, y_k] <= (1 - alpha) V(x_k)``
for every state and every current mode.  The conditional expectation is
computed exactly by enumerating mode continuations; for positively
homogeneous V and linear modes the worst case over all states reduces to a
grid on the unit sup-norm sphere.  A certificate (T, alpha) guarantees decay
of V at per-step rate ``(1 - alpha)**(1/T)``, which Monte Carlo runs can
then be checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import sequences
from .errors import DimensionMismatch, EnumerationTooLarge, InvalidDistribution, NoCertificate
from .sequences import SequenceModel

__all__ = [
    "SwitchedSystem",
    "LyapunovFunction",
    "inf_norm",
    "SphereGrid",
    "FiniteStepCertificate",
    "DecayReport",
    "expected_lyapunov",
    "certify_contraction",
    "monte_carlo_decay",
]

ENUMERATION_LIMIT = 10**6
V_FLOOR = 1e-300


@dataclass(frozen=True)
class SwitchedSystem:
    """Linear modes (arbitrary square matrices) plus a mode-index signal."""

    modes: tuple
    signal: SequenceModel

    def __post_init__(self):
        mats = tuple(np.array(a, dtype=float) for a in self.modes)
        if not mats:
            raise DimensionMismatch("a switched system needs at least one mode")
        n = mats[0].shape[0]
        for a in mats:
            if a.ndim != 2 or a.shape != (n, n):
                raise DimensionMismatch("modes must be square and share dimensions")
            a.flags.writeable = False
        if self.signal.num_symbols > len(mats):
            raise DimensionMismatch(
                f"signal uses {self.signal.num_symbols} symbols but there are "
                f"{len(mats)} modes")
        object.__setattr__(self, "modes", mats)

    @property
    def dimension(self) -> int:
        return self.modes[0].shape[0]

    @property
    def num_modes(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class LyapunovFunction:
    """A candidate certificate function.

    ``fn`` must accept arrays of shape (..., n) and evaluate along the last
    axis.  ``degree`` is the positive-homogeneity degree when there is one
    (``fn(c x) = c**degree fn(x)`` for c > 0); grid certification requires it.
    """

    fn: object
    name: str = "V"
    degree: float | None = None

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def inf_norm() -> LyapunovFunction:
    """The sup norm, the workhorse certificate for averaging dynamics."""
    return LyapunovFunction(
        fn=lambda x: np.abs(x).max(axis=-1), name="sup-norm", degree=1.0)


def _check_function(V: LyapunovFunction, n: int, probes: np.ndarray):
    if abs(float(V(np.zeros(n)))) > 1e-14:
        raise InvalidDistribution(f"{V.name}(0) must be 0")
    vals = np.asarray(V(probes), dtype=float)
    if np.any(vals < 0):
        raise InvalidDistribution(f"{V.name} is negative on a probe point")


@dataclass(frozen=True)
class SphereGrid:
    """Sampling of the unit sup-norm sphere used for the worst-case search.

    In dimension 2 each face carries an even grid with the endpoints (the
    breakpoints of piecewise-linear data live there); in higher dimensions
    faces are filled with a seeded Sobol set.  The signed unit vectors are
    always included.
    """

    resolution: int = 101
    points_per_face: int = 256
    seed: int = 0

    def points(self, n: int) -> np.ndarray:
        if n < 1:
            raise DimensionMismatch("dimension must be positive")
        vertices = np.concatenate([np.eye(n), -np.eye(n)], axis=0)
        if n == 1:
            return vertices
        faces = []
        if n == 2:
            t = np.linspace(-1.0, 1.0, self.resolution)
            for axis in range(2):
                for sign in (1.0, -1.0):
                    pts = np.empty((t.size, 2))
                    pts[:, axis] = sign
                    pts[:, 1 - axis] = t
                    faces.append(pts)
        else:
            sob = qmc.Sobol(d=n - 1, scramble=True, seed=self.seed)
            for axis in range(n):
                for sign in (1.0, -1.0):
                    free = 2.0 * sob.random(self.points_per_face) - 1.0
                    pts = np.empty((self.points_per_face, n))
                    pts[:, axis] = sign
                    other = [c for c in range(n) if c != axis]
                    pts[:, other] = free
                    faces.append(pts)
        return np.concatenate([vertices] + faces, axis=0)


@dataclass(frozen=True)
class FiniteStepCertificate:
    """Witness that V contracts in conditional expectation after ``horizon``
    steps by the factor ``1 - alpha``, worst case over grid states and
    current modes."""

    horizon: int
    alpha: float
    supermartingale_ok: bool
    grid_resolution: int

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidDistribution("alpha must lie strictly between 0 and 1")

    @property
    def rate(self) -> float:
        """Certified per-step decay factor of V."""
        return (1.0 - self.alpha) ** (1.0 / self.horizon)


def _continuation_operators(system: SwitchedSystem, mode: int, horizon: int):
    """All positive-probability mode continuations of the given length.

    Returns (probs, operators) where operators[w] is the matrix applied to
    the state over continuation w (later modes multiplied on the left), and
    probs[w] the continuation's probability given the current mode.
    """
    signal = system.signal
    m = signal.num_symbols
    if m**horizon > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(
            f"{m}^{horizon} continuations exceed {ENUMERATION_LIMIT}")
    probs, ops = [], []
    stack = [(1.0, int(mode), np.eye(system.dimension), 0)]
    while stack:
        prob, prev, op, depth = stack.pop()
        if depth == horizon:
            probs.append(prob)
            ops.append(op)
            continue
        dist = signal.step_distribution(prev)
        for sym, p in enumerate(dist):
            if p > 0:
                stack.append((prob * p, sym, system.modes[sym] @ op, depth + 1))
    return np.asarray(probs), np.asarray(ops)


def expected_lyapunov(system: SwitchedSystem, V: LyapunovFunction, x,
                      mode: int, horizon: int) -> float:
    """Exact ``E[V(x_{k+horizon}) | x_k = x, y_k = mode]`` by enumerating
    positive-probability mode continuations."""
    x = np.asarray(x, dtype=float)
    probs, ops = _continuation_operators(system, mode, horizon)
    values = np.asarray(V(ops @ x), dtype=float)
    return float(probs @ values)


def _worst_ratio(system: SwitchedSystem, V: LyapunovFunction,
                 grid_points: np.ndarray, horizon: int) -> float:
    """Max over modes and grid points of E[V after horizon] / V(x)."""
    vx = np.asarray(V(grid_points), dtype=float)
    keep = vx > 0
    pts, vx = grid_points[keep], vx[keep]
    worst = -np.inf
    for mode in range(system.num_modes):
        probs, ops = _continuation_operators(system, mode, horizon)
        images = np.einsum("wij,gj->wgi", ops, pts)
        exp_v = probs @ np.asarray(V(images), dtype=float)
        worst = max(worst, float((exp_v / vx).max()))
    return worst


def certify_contraction(system: SwitchedSystem, V: LyapunovFunction,
                        horizon_max: int, grid: SphereGrid | None = None
                        ) -> FiniteStepCertificate:
    """Search the smallest horizon at which V contracts in expectation.

    Requires a positively homogeneous V (so the worst case over all states
    equals the worst case over the unit sphere) and an i.i.d. or
    Markov-modulated signal.  Raises ``NoCertificate`` when no horizon up to
    ``horizon_max`` contracts on the grid.
    """
    if V.degree is None:
        raise InvalidDistribution(
            "grid certification needs a positively homogeneous function")
    if isinstance(system.signal, sequences.ScriptedModel):
        raise InvalidDistribution(
            "certificates condition on the current mode; use an i.i.d. or "
            "Markov-modulated signal")
    grid = grid or SphereGrid()
    pts = grid.points(system.dimension)
    _check_function(V, system.dimension, pts)
    supermartingale_ok = None
    for horizon in range(1, int(horizon_max) + 1):
        beta = _worst_ratio(system, V, pts, horizon)
        if horizon == 1:
            supermartingale_ok = beta <= 1.0 + 1e-12
        if beta < 1.0:
            return FiniteStepCertificate(
                horizon=horizon,
                alpha=1.0 - beta,
                supermartingale_ok=bool(supermartingale_ok),
                grid_resolution=grid.resolution,
            )
    raise NoCertificate(int(horizon_max))


@dataclass(frozen=True)
class DecayReport:
    """Monte Carlo summary of V along simulated trajectories.

    ``fitted_rate`` is the geometric mean over trials of the per-trial
    least-squares decay of log V; trials whose V hits exact 0 immediately
    contribute rate 0 (they have already converged).
    """

    fitted_rate: float
    per_trial_rate: tuple
    per_trial_tail: tuple
    tail_fraction: float
    tolerance: float
    steps: int
    trials: int


def _trial_rate(vs: np.ndarray) -> float:
    ks = np.arange(vs.size, dtype=float)
    keep = vs > V_FLOOR
    if keep.sum() < 2:
        return 0.0
    slope = np.polyfit(ks[keep], np.log(vs[keep]), 1)[0]
    return float(np.exp(slope))


def monte_carlo_decay(system: SwitchedSystem, V: LyapunovFunction, x0,
                      steps: int, trials: int, tol: float = 1e-8,
                      keep_history: bool = False):
    """Simulate trajectories and fit the realized decay of V.

    Trial t draws its switching sequence with the stream-split seed
    ``signal.seed ^ t``, so reports are reproducible and trials independent.
    With ``keep_history`` the (trials, steps + 1) array of V values is
    returned alongside the report.
    """
    x0 = np.asarray(x0, dtype=float)
    rates, tails = [], []
    history = np.empty((int(trials), int(steps) + 1)) if keep_history else None
    for t in range(int(trials)):
        idx = system.signal.sample_indices(steps, trial=t)
        x = x0.copy()
        vs = np.empty(int(steps) + 1)
        vs[0] = float(V(x))
        for k in range(int(steps)):
            x = system.modes[idx[k]] @ x
            vs[k + 1] = float(V(x))
        rates.append(_trial_rate(vs))
        tails.append(float(vs[-1]))
        if keep_history:
            history[t] = vs
    rates = np.asarray(rates)
    fitted = 0.0 if np.any(rates == 0.0) else float(np.exp(np.mean(np.log(rates))))
    tails_arr = np.asarray(tails)
    report = DecayReport(
        fitted_rate=fitted,
        per_trial_rate=tuple(rates.tolist()),
        per_trial_tail=tuple(tails_arr.tolist()),
        tail_fraction=float((tails_arr < tol).mean()),
        tolerance=float(tol),
        steps=int(steps),
        trials=int(trials),
    )
    if keep_history:
        return report, history
    return report
