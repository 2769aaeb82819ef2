import json

import numpy as np
import pytest

from shallownet import states
from shallownet.cli import main
from shallownet.dsl import serialize
from shallownet.network import cat_ladder


@pytest.fixture()
def ladder8(tmp_path):
    path = tmp_path / "ladder8.qnet"
    path.write_text(serialize(cat_ladder(3, include_prologue=True)))
    return str(path)


@pytest.fixture()
def empty_circuit(tmp_path):
    path = tmp_path / "empty.qnet"
    path.write_text("qubits 3\n")
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestSimulate:
    def test_ladder_reaches_cat(self, capsys, ladder8):
        code, report = run_json(capsys, ["simulate", ladder8, "--input", "zeros"])
        assert code == 0
        assert report["fidelity_to_cat"] >= 1 - 1e-10
        assert report["e_lower"] == pytest.approx(1.0, abs=1e-6)
        assert report["depth"] == 3
        assert report["kind"] == "pure"

    def test_empty_circuit_passthrough(self, capsys, empty_circuit):
        code, report = run_json(capsys, ["simulate", empty_circuit, "--input", "zeros"])
        assert code == 0
        assert report["depth"] == 0
        assert report["purity"] == pytest.approx(1.0, abs=1e-10)
        assert report["variance"]["z"] == pytest.approx(0.0, abs=1e-12)

    def test_malformed_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.qnet"
        bad.write_text("qubits 2\nstep\n  gate FLIP 1\n")
        assert main(["simulate", str(bad)]) == 2
        assert "unknown-gate" in capsys.readouterr().err

    def test_missing_file_exits_2(self, capsys):
        assert main(["simulate", "no_such_file.qnet"]) == 2

    def test_product_and_state_out(self, tmp_path, capsys, empty_circuit):
        out_state = tmp_path / "state.json"
        code, report = run_json(
            capsys,
            ["simulate", empty_circuit, "--input", "product:+,0,1",
             "--state-out", str(out_state)],
        )
        assert code == 0
        loaded = states.state_from_json(out_state.read_text())
        expect = 1 / np.sqrt(2)
        assert abs(loaded.amplitudes[0b001]) == pytest.approx(expect)
        assert abs(loaded.amplitudes[0b101]) == pytest.approx(expect)

    def test_mixture_input(self, tmp_path, capsys, empty_circuit):
        proj0 = states.state_to_dict(states.DensityState(1, 2, np.diag([1.0, 0.0])))
        proj1 = states.state_to_dict(states.DensityState(1, 2, np.diag([0.0, 1.0])))
        doc = {"terms": [
            {"weight": 0.5, "factors": [proj0] * 3},
            {"weight": 0.5, "factors": [proj1] * 3},
        ]}
        mix_file = tmp_path / "mix.json"
        mix_file.write_text(json.dumps(doc))
        code, report = run_json(
            capsys,
            ["simulate", empty_circuit, "--input", f"mixture:{mix_file}"],
        )
        assert code == 0
        assert report["kind"] == "density"
        assert report["purity"] == pytest.approx(0.5, abs=1e-10)


class TestErho:
    def test_cat_via_circuit(self, capsys, ladder8):
        code, report = run_json(capsys, ["erho", "--circuit", ladder8, "--input", "zeros"])
        assert code == 0
        assert report["e_lower"] == pytest.approx(1.0, abs=1e-6)

    def test_maximally_mixed_state_file(self, tmp_path, capsys):
        rho = states.DensityState(2, 2, np.eye(4) / 4)
        path = tmp_path / "mixed.json"
        path.write_text(states.state_to_json(rho))
        code, report = run_json(capsys, ["erho", str(path)])
        assert code == 0
        assert report["e_lower"] <= 1e-10

    def test_zeros_baseline(self, capsys, tmp_path):
        circuit = tmp_path / "idle.qnet"
        circuit.write_text("qubits 8\n")
        code, report = run_json(capsys, ["erho", "--circuit", str(circuit)])
        assert code == 0
        assert report["e_lower"] == pytest.approx(1 / np.sqrt(8), abs=1e-4)
        assert report["variance_bound"] == pytest.approx(1 / np.sqrt(8), abs=1e-6)


class TestVerify:
    def test_sweep_one_passes(self, capsys):
        code, report = run_json(
            capsys, ["verify", "1", "--trials", "6", "--seed", "3", "--noise", "0.1"]
        )
        assert code == 0
        assert report["all_pass"] is True
        assert len(report["rows"]) == 6
        assert {"trial", "seed", "n", "k", "noise", "lhs", "bound", "pass"} <= set(report["rows"][0])

    def test_sweep_two_passes(self, capsys):
        code, report = run_json(capsys, ["verify", "2", "--trials", "6", "--seed", "3"])
        assert code == 0
        assert report["all_pass"] is True

    def test_zero_trials_empty_report(self, capsys):
        code, report = run_json(capsys, ["verify", "1", "--trials", "0"])
        assert code == 0
        assert report["rows"] == []

    def test_csv_determinism(self, capsys, tmp_path):
        argv = ["verify", "1", "--trials", "4", "--seed", "11", "--format", "csv"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out
        assert first == second
        assert first.splitlines()[0] == "trial,seed,n,k,noise,lhs,bound,pass"

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("trials=3\nseed=9\nnoise=0.0\n")
        code, report = run_json(capsys, ["verify", "1", "--config", str(cfg)])
        assert code == 0
        assert len(report["rows"]) == 3
        assert report["config"]["seed"] == 9
        code, report = run_json(
            capsys, ["verify", "1", "--config", str(cfg), "--trials", "2"]
        )
        assert len(report["rows"]) == 2


class TestLightcone:
    def test_ladder_report(self, capsys, ladder8):
        code, report = run_json(capsys, ["lightcone", ladder8, "--sites", "1"])
        assert code == 0
        assert report["max_support_size"] <= 8
        assert report["bounds"] == {"support": 8, "multiplicity": 8, "pairs_per_obs": 64}
        assert report["seed_support"] == [1, 2, 3, 5]

    def test_depth_zero_singletons(self, capsys, empty_circuit):
        code, report = run_json(capsys, ["lightcone", empty_circuit])
        assert code == 0
        assert report["max_support_size"] == 1
        assert report["supports"] == [[1], [2], [3]]
        assert report["bounds"] == {"support": 1, "multiplicity": 1, "pairs_per_obs": 1}


class TestDepthbound:
    def test_reference_values(self, capsys):
        assert main(["depthbound", "8", "1"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(1.0)
        assert main(["depthbound", "2", "1"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.0)
        assert main(["depthbound", "1048576", "1"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(9.5)

    def test_clamp(self, capsys):
        main(["depthbound", "8", "0.1"])
        assert float(capsys.readouterr().out) < 0
        main(["depthbound", "8", "0.1", "--clamp"])
        assert float(capsys.readouterr().out) == 0.0

    def test_zero_level_usage_error(self, capsys):
        assert main(["depthbound", "8", "0"]) == 2

    def test_json_format(self, capsys):
        code, report = run_json(capsys, ["depthbound", "8", "1", "--format", "json"])
        assert code == 0
        assert report["bound"] == pytest.approx(1.0)


class TestMeasure:
    def test_strong_exact_on_zeros(self, capsys, tmp_path):
        circuit = tmp_path / "idle4.qnet"
        circuit.write_text("qubits 4\n")
        code = main(["measure", "--circuit", str(circuit), "--mode", "strong", "--exact"])
        assert code == 0
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        dist = {r["value"]: r["probability"] for r in records}
        assert dist[1.0] == pytest.approx(0.5, abs=1e-9)
        assert dist[-1.0] == pytest.approx(0.5, abs=1e-9)

    def test_weak_exact_on_cat(self, capsys, ladder8):
        code = main(["measure", "--circuit", ladder8, "--mode", "weak", "--exact"])
        assert code == 0
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        total = {}
        for r in records:
            total[r["value"]] = total.get(r["value"], 0.0) + r["probability"]
        assert total == pytest.approx({1.0: 1.0}, abs=1e-9)

    def test_zero_shots_empty(self, capsys, ladder8):
        code = main(["measure", "--circuit", ladder8, "--mode", "strong", "--shots", "0"])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_sampled_deterministic_with_post_states(self, capsys, tmp_path, ladder8):
        states_dir = tmp_path / "posts"
        argv = ["measure", "--circuit", ladder8, "--mode", "conjugated",
                "--shots", "3", "--seed", "4", "--states-dir", str(states_dir)]
        code = main(argv)
        assert code == 0
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first
        records = [json.loads(line) for line in first.splitlines()]
        assert len(records) == 3
        for r in records:
            assert r["post_state_ref"] is not None
            loaded = states.state_from_json(
                (tmp_path / "posts" / r["post_state_ref"].split("/")[-1]).read_text()
            )
            assert loaded.n == 8

    def test_mode_observable_mismatch(self, capsys, ladder8):
        code = main(["measure", "--circuit", ladder8, "--mode", "conjugated",
                     "--observable", "parity-z", "--exact"])
        assert code == 2
        assert "mismatch" in capsys.readouterr().err


class TestDeterminism:
    def test_same_seed_byte_identical_json(self, capsys):
        argv = ["verify", "2", "--trials", "5", "--seed", "21"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first


def test_verify_exits_one_on_violation(monkeypatch, capsys):
    # a genuine counterexample cannot be produced, so fake one row
    from shallownet import cli as cli_module

    def fake_sweep(which, config):
        return [{"trial": 0, "seed": 1, "n": 4, "k": 0, "noise": 0.0,
                 "lhs": 2.0, "bound": 0.7, "pass": False}]

    monkeypatch.setattr(cli_module.sweeps, "run_sweep", fake_sweep)
    assert main(["verify", "1", "--trials", "1"]) == 1
    assert "BOUND VIOLATION" in capsys.readouterr().err
