import json
import os

import numpy as np
import pytest

import stochprod as sp
from stochprod import cli

CHAIN3 = [[0.0, 0.4, 0.6], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
SCRAM = [[0.2, 0.8], [0.5, 0.5]]


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run_cli(kind, cfg_path, out_dir, *extra):
    return cli.main(["run", kind, "--config", cfg_path, "--out", str(out_dir),
                     *extra])


def read_outputs(out_dir):
    with open(os.path.join(out_dir, "summary.json")) as fh:
        summary = json.load(fh)
    with open(os.path.join(out_dir, "trace.csv")) as fh:
        lines = fh.read().strip().splitlines()
    return summary, lines


class TestClassify:
    def test_classifies_chain_and_averager(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "matrices": [{"n": 3, "rows": CHAIN3},
                         {"n": 2, "rows": [[0.5, 0.5], [0.5, 0.5]]}],
            "labels": ["chain", "avg"], "seed": 1})
        out = tmp_path / "out"
        assert run_cli("classify", cfg, out) == 0
        summary, lines = read_outputs(out)
        chain, avg = summary["results"]["matrices"]
        assert chain == {"label": "chain", "tau": 1.0, "scrambling": False,
                         "sia": False, "markov": False, "period": 2}
        assert avg["scrambling"] and avg["sia"] and avg["markov"]
        assert lines[0] == "label,tau,scrambling,sia,markov,period"
        assert len(lines) == 3

    def test_envelope_fields(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "matrices": [{"n": 2, "rows": SCRAM}], "seed": 17})
        out = tmp_path / "out"
        run_cli("classify", cfg, out)
        summary, _ = read_outputs(out)
        assert summary["seed"] == 17
        assert summary["version"] == sp.__version__
        assert len(summary["config_hash"]) == 64


class TestCertify:
    def test_two_step_certificate(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "modes": [[[0.2, 0], [0, 1]], [[1, 0], [0, 0.8]], [[1, 0], [0, 0.6]]],
            "signal": {"variant": "markov", "initial": [1, 0, 0],
                       "transition": CHAIN3, "seed": 5},
            "horizon_max": 4, "steps": 40, "trials": 20, "seed": 5})
        out = tmp_path / "out"
        assert run_cli("certify", cfg, out) == 0
        summary, lines = read_outputs(out)
        cert = summary["results"]["certificate"]
        assert cert["T"] == 2
        assert cert["alpha"] >= 0.3 - 1e-9
        assert cert["supermartingale_ok"]
        assert lines[0] == "k,mean_V,q10,q50,q90"
        assert len(lines) == 42  # header + steps + initial row


class TestProduct:
    def test_converging_product(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "model": {"variant": "iid", "weights": [0.5, 0.5], "seed": 2,
                      "set": [{"n": 2, "rows": SCRAM},
                              {"n": 2, "rows": [[1, 0], [0, 1]]}]},
            "steps": 4000, "seed": 2})
        out = tmp_path / "out"
        assert run_cli("product", cfg, out) == 0
        summary, lines = read_outputs(out)
        res = summary["results"]
        assert res["p"] == 0.5 and res["h"] == 1
        assert res["bound"] == pytest.approx(0.9)
        assert res["converged"]
        assert lines[0] == "k,tau,spread"

    def test_budget_exhausted_exit_code(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "model": {"variant": "iid", "weights": [0.5, 0.5], "seed": 2,
                      "set": [{"n": 2, "rows": SCRAM},
                              {"n": 2, "rows": [[1, 0], [0, 1]]}]},
            "steps": 8, "seed": 2})
        assert run_cli("product", cfg, tmp_path / "out") == 3


class TestAsync:
    def test_rooted_graph_converges(self, tmp_path):
        edges = [[2, 1], [1, 2], [2, 5], [5, 3], [3, 4], [4, 5], [4, 0], [1, 0]]
        cfg = write(tmp_path / "c.json", {
            "graph": {"n": 6, "edges": edges},
            "rates": 0.5, "steps": 4000, "seed": 11})
        out = tmp_path / "out"
        assert run_cli("async", cfg, out) == 0
        summary, lines = read_outputs(out)
        assert summary["results"]["converged"]
        spreads = [float(line.split(",")[1]) for line in lines[1:]]
        assert spreads[-1] < 1e-8
        assert spreads[-1] <= spreads[0]


class TestLineq:
    def test_two_agent_system(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "system": {"blocks": [{"A": [[1.0, 0.0]], "b": [1.0]},
                                  {"A": [[0.0, 1.0]], "b": [1.0]}]},
            "graphs": [{"n": 2, "edges": [[0, 0], [1, 1], [0, 1], [1, 0]]}],
            "graph_model": {"variant": "iid", "weights": [1.0], "seed": 3},
            "max_iters": 500, "seed": 3})
        out = tmp_path / "out"
        assert run_cli("lineq", cfg, out) == 0
        summary, lines = read_outputs(out)
        res = summary["results"]
        assert res["converged"]
        np.testing.assert_allclose(res["solution"], [1.0, 1.0], atol=1e-7)
        assert lines[0] == "k,disagreement,residual"

    def test_non_convergence_exit_code(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "system": {"blocks": [{"A": [[1.0, 0.0]], "b": [1.0]},
                                  {"A": [[0.0, 1.0]], "b": [1.0]}]},
            "graphs": [{"n": 2, "edges": [[0, 0], [1, 1], [0, 1], [1, 0]]}],
            "graph_model": {"variant": "iid", "weights": [1.0], "seed": 3},
            "max_iters": 2, "seed": 3})
        assert run_cli("lineq", cfg, tmp_path / "out") == 3


class TestRunnerContract:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "model": {"variant": "iid", "weights": [0.5, 0.5], "seed": 9,
                      "set": [{"n": 2, "rows": SCRAM},
                              {"n": 2, "rows": [[1, 0], [0, 1]]}]},
            "steps": 500, "seed": 9})
        for out in ("a", "b"):
            run_cli("product", cfg, tmp_path / out)
        for name in ("summary.json", "trace.csv"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b

    def test_seed_override_changes_hash(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "matrices": [{"n": 2, "rows": SCRAM}], "seed": 1})
        run_cli("classify", cfg, tmp_path / "a")
        run_cli("classify", cfg, tmp_path / "b", "--seed", "2")
        sa, _ = read_outputs(tmp_path / "a")
        sb, _ = read_outputs(tmp_path / "b")
        assert sa["seed"] == 1 and sb["seed"] == 2
        assert sa["config_hash"] != sb["config_hash"]

    def test_missing_config_is_validation_error(self, tmp_path, capsys):
        assert run_cli("classify", str(tmp_path / "nope.json"), tmp_path / "o") == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_json_is_validation_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli("classify", str(bad), tmp_path / "o") == 2

    def test_invalid_matrix_is_validation_error(self, tmp_path):
        cfg = write(tmp_path / "c.json", {
            "matrices": [{"n": 2, "rows": [[0.2, 0.0], [0.0, 1.0]]}], "seed": 1})
        assert run_cli("classify", cfg, tmp_path / "o") == 2


class TestJsonRoundTrips:
    def test_model_round_trip(self):
        from stochprod import jsonio
        fset = sp.FiniteMatrixSet((sp.StochasticMatrix(SCRAM),
                                   sp.StochasticMatrix(np.eye(2))))
        for model in (
            sp.IIDModel(weights=[0.25, 0.75], seed=4, matrix_set=fset),
            sp.MarkovModulatedModel(initial=[1, 0], seed=4, matrix_set=fset,
                                    transition=[[0.5, 0.5], [1.0, 0.0]]),
            sp.ScriptedModel(indices=(0, 1, 1), seed=4, matrix_set=fset),
        ):
            back = jsonio.model_from_json(jsonio.model_to_json(model))
            assert type(back) is type(model)
            assert back.seed == model.seed
            assert np.array_equal(back.sample_indices(64),
                                  model.sample_indices(64))

    def test_graph_round_trip(self):
        from stochprod import jsonio
        g = sp.DirectedGraph(3, frozenset({(0, 1), (1, 2), (2, 0), (1, 1)}))
        assert jsonio.graph_from_json(jsonio.graph_to_json(g)) == g
