"""Reproducible experiment runner.

``stochprod run <kind> --config cfg.json [--seed N] [--out DIR] [--trials N]
[--steps N] [--tol X]`` loads a JSON experiment description, applies the flag
overrides, dispatches to the library, and writes ``summary.json`` plus
``trace.csv`` into the output directory.  Outputs embed the seed, a hash of
the effective configuration, and the package version; identical (config,
seed) pairs produce byte-identical files.

Exit codes: 0 success, 2 validation/config error, 3 budget exhausted without
convergence (product and lineq kinds).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, jsonio
from . import agreement, equations, lyapunov, matrices, products
from .errors import ConfigParse, StochprodError

__all__ = ["ExperimentConfig", "run", "main"]

KINDS = ("certify", "product", "async", "lineq", "classify")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Effective experiment description after flag overrides."""

    kind: str
    params: dict
    seed: int
    out_dir: str

    def hash(self) -> str:
        canon = json.dumps({"kind": self.kind, "seed": self.seed,
                            "params": self.params},
                           sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def load_config(kind: str, path: str, overrides: dict) -> ExperimentConfig:
    if kind not in KINDS:
        raise ConfigParse(f"unknown experiment kind {kind!r}; choose from {KINDS}")
    try:
        with open(path) as fh:
            params = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(params, dict):
        raise ConfigParse(f"{path}: top-level config must be an object")
    for key, value in overrides.items():
        if value is not None:
            params[key] = value
    seed = int(params.get("seed", 0))
    params["seed"] = seed
    out_dir = params.pop("out", "out")
    return ExperimentConfig(kind=kind, params=params, seed=seed, out_dir=out_dir)


def _atomic_write(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_outputs(config: ExperimentConfig, summary: dict, header, rows):
    os.makedirs(config.out_dir, exist_ok=True)
    envelope = {
        "kind": config.kind,
        "seed": config.seed,
        "config_hash": config.hash(),
        "version": __version__,
        "results": summary,
    }
    _atomic_write(os.path.join(config.out_dir, "summary.json"),
                  json.dumps(envelope, sort_keys=True, indent=2) + "\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(os.path.join(config.out_dir, "trace.csv"), buf.getvalue())


def _run_classify(config: ExperimentConfig):
    p = config.params
    mats = [jsonio.matrix_from_json(m) for m in p.get("matrices", [])]
    if not mats:
        raise ConfigParse("classify needs a nonempty 'matrices' list")
    labels = p.get("labels") or [f"M{i}" for i in range(len(mats))]
    if len(labels) != len(mats):
        raise ConfigParse("one label per matrix")
    per_matrix = []
    rows = []
    for label, m in zip(labels, mats):
        cls = matrices.classify(m)
        t = matrices.tau(m)
        per_matrix.append({
            "label": label, "tau": t, "scrambling": cls.is_scrambling,
            "sia": cls.is_sia, "markov": cls.is_markov, "period": cls.period,
        })
        rows.append([label, repr(t), cls.is_scrambling, cls.is_sia,
                     cls.is_markov, cls.period])
    header = ["label", "tau", "scrambling", "sia", "markov", "period"]
    return {"matrices": per_matrix}, header, rows, EXIT_OK


def _run_certify(config: ExperimentConfig):
    p = config.params
    try:
        modes = [np.asarray(m, dtype=float) for m in p["modes"]]
        signal = jsonio.model_from_json(p["signal"])
    except KeyError as exc:
        raise ConfigParse(f"certify config missing field {exc}") from exc
    system = lyapunov.SwitchedSystem(modes=tuple(modes), signal=signal)
    v = lyapunov.inf_norm()
    grid = lyapunov.SphereGrid(resolution=int(p.get("grid_resolution", 101)),
                               seed=config.seed)
    cert = lyapunov.certify_contraction(
        system, v, horizon_max=int(p.get("horizon_max", 8)), grid=grid)
    steps = int(p.get("steps", 50))
    trials = int(p.get("trials", 100))
    x0 = np.asarray(p.get("x0", np.ones(system.dimension)), dtype=float)
    report, history = lyapunov.monte_carlo_decay(
        system, v, x0, steps=steps, trials=trials,
        tol=float(p.get("tol", 1e-8)), keep_history=True)
    qs = np.quantile(history, [0.1, 0.5, 0.9], axis=0)
    means = history.mean(axis=0)
    rows = [[k, repr(float(means[k])), repr(float(qs[0, k])),
             repr(float(qs[1, k])), repr(float(qs[2, k]))]
            for k in range(history.shape[1])]
    summary = {
        "certificate": {"T": cert.horizon, "alpha": cert.alpha,
                        "rate": cert.rate,
                        "grid_resolution": cert.grid_resolution,
                        "supermartingale_ok": cert.supermartingale_ok},
        "decay": {"fitted_rate": report.fitted_rate,
                  "tail_fraction": report.tail_fraction,
                  "steps": report.steps, "trials": report.trials},
    }
    return summary, ["k", "mean_V", "q10", "q50", "q90"], rows, EXIT_OK


def _run_product(config: ExperimentConfig):
    p = config.params
    try:
        model = jsonio.model_from_json(p["model"])
    except KeyError as exc:
        raise ConfigParse(f"product config missing field {exc}") from exc
    steps = int(p.get("steps", 10000))
    tol = float(p.get("tol", 1e-8))
    if "window" in p:
        report = products.window_rate_bound(model, int(p["window"]))
    else:
        report = products.find_scrambling_window(model, int(p.get("window_max", 8)))
    trace = products.simulate_product(model, steps=steps)
    try:
        report = report.with_empirical(products.fit_empirical_rate(trace))
    except StochprodError:
        pass
    final_tau = trace.taus[-1] if trace.taus else 0.0
    stopped_early = not trace.checkpoints or trace.checkpoints[-1] < trace.steps
    converged = stopped_early or final_tau < tol
    rows = [[k, repr(t), repr(s)]
            for k, t, s in zip(trace.checkpoints, trace.taus, trace.spreads)]
    summary = {
        "p": report.scrambling_prob, "alpha": report.min_entry,
        "h": report.window_len, "bound": report.bound,
        "empirical_rate": report.empirical_rate,
        "final_tau": final_tau, "converged": converged, "steps": steps,
    }
    return (summary, ["k", "tau", "spread"], rows,
            EXIT_OK if converged else EXIT_NO_CONVERGENCE)


def _run_async(config: ExperimentConfig):
    p = config.params
    if "matrix" in p:
        w = jsonio.matrix_from_json(p["matrix"])
    elif "graph" in p:
        g = jsonio.graph_from_json(p["graph"])
        w = matrices.StochasticMatrix(_uniform_weights_from_graph(g))
    else:
        raise ConfigParse("async config needs a 'matrix' or a 'graph'")
    n = w.n
    rates = p.get("rates", 0.5)
    rates = np.full(n, float(rates)) if np.isscalar(rates) else np.asarray(rates, float)
    clock_kind = p.get("clock", "bernoulli")
    if clock_kind == "bernoulli":
        clocks = agreement.BernoulliClocks(rates=rates, seed=config.seed)
    elif clock_kind == "poisson":
        clocks = agreement.PoissonClocks(rates=rates, seed=config.seed,
                                         delta=float(p.get("delta", 1.0)))
    else:
        raise ConfigParse(f"unknown clock kind {clock_kind!r}")
    x0 = np.asarray(p.get("x0", np.arange(n) / max(n - 1, 1)), dtype=float)
    steps = int(p.get("steps", 5000))
    tol = float(p.get("tol", 1e-8))
    trace = agreement.simulate_async(w, clocks, x0, steps=steps,
                                     record_events=False)
    rows = [[k, repr(s)] for k, s in enumerate(trace.spreads)]
    summary = {
        "final_spread": trace.spreads[-1],
        "converged": trace.spreads[-1] < tol,
        "steps": steps, "tol": tol,
    }
    return summary, ["k", "spread"], rows, EXIT_OK


def _uniform_weights_from_graph(g) -> np.ndarray:
    from .graphs import adjacency
    incoming = adjacency(g).T.astype(float)
    degrees = incoming.sum(axis=1)
    if np.any(degrees == 0):
        raise ConfigParse("every vertex needs at least one incoming edge")
    return incoming / degrees[:, None]


def _run_lineq(config: ExperimentConfig):
    p = config.params
    try:
        blocks = jsonio.system_blocks_from_json(p["system"])
        graph_set = tuple(jsonio.graph_from_json(g) for g in p["graphs"])
        graph_model = jsonio.model_from_json(p["graph_model"])
    except KeyError as exc:
        raise ConfigParse(f"lineq config missing field {exc}") from exc
    system = equations.PartitionedLinearSystem(blocks=tuple(blocks))
    gmodel = equations.GraphSequenceModel(
        graph_set=graph_set, model=graph_model, window=int(p.get("window", 1)))
    report = equations.run_solver(
        system, gmodel,
        max_iters=int(p.get("max_iters", 100000)),
        tol=float(p.get("tol", 1e-8)),
        check_connectivity=bool(p.get("check_connectivity", True)),
        record_every=int(p.get("record_every", 1)),
        norm_windows=int(p.get("norm_windows", 0)))
    rows = [[k, repr(d), repr(r)] for k, d, r in report.history]
    summary = {
        "converged": report.converged, "iterations": report.iterations,
        "disagreement": report.disagreement, "residual": report.residual,
        "solution": report.solution.tolist(),
        "fitted_decay": report.fitted_decay,
        "window_norms": list(report.window_norms),
        "exponential_consistent": report.exponential_consistent,
    }
    return (summary, ["k", "disagreement", "residual"], rows,
            EXIT_OK if report.converged else EXIT_NO_CONVERGENCE)


_RUNNERS = {
    "classify": _run_classify,
    "certify": _run_certify,
    "product": _run_product,
    "async": _run_async,
    "lineq": _run_lineq,
}


def run(config: ExperimentConfig) -> int:
    """Execute one experiment and write its artifacts; returns the exit code."""
    summary, header, rows, code = _RUNNERS[config.kind](config)
    _write_outputs(config, summary, header, rows)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stochprod",
        description="Experiments on random products of stochastic matrices")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment from a JSON config")
    runp.add_argument("kind", choices=KINDS)
    runp.add_argument("--config", required=True)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--out", default=None)
    runp.add_argument("--trials", type=int, default=None)
    runp.add_argument("--steps", type=int, default=None)
    runp.add_argument("--tol", type=float, default=None)
    args = parser.parse_args(argv)

    overrides = {"seed": args.seed, "out": args.out, "trials": args.trials,
                 "steps": args.steps, "tol": args.tol}
    try:
        config = load_config(args.kind, args.config, overrides)
        return run(config)
    except StochprodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
