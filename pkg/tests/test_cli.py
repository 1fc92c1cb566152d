import json
import subprocess
import sys

import numpy as np
import pytest

from uapprox.cli import CONFIG_SCHEMA, load_config, main, resolve_out_dir


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(tmp_path, cfg, *extra, out="out"):
    code = main([cfg["command"], "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


GREEDY = {"command": "greedy", "seed": 3, "resolution": 129,
          "params": {"algorithm": "ks", "dictionary": "logistic", "weights": "random", "m": 8, "steps": 12}}


class TestConfig:
    def test_set_overrides(self, tmp_path):
        cfg = load_config(write_config(tmp_path, GREEDY), ["params.steps=5", "output.dir=elsewhere"])
        assert cfg["params"]["steps"] == 5
        assert resolve_out_dir(None, cfg).name == "elsewhere"

    def test_out_dir_precedence(self, monkeypatch):
        monkeypatch.setenv("UAPPROX_OUT_DIR", "from-env")
        assert str(resolve_out_dir("flag", {"output": {"dir": "cfg"}})) == "flag"
        assert str(resolve_out_dir(None, {"output": {"dir": "cfg"}})) == "cfg"
        assert str(resolve_out_dir(None, {})) == "from-env"
        monkeypatch.delenv("UAPPROX_OUT_DIR")
        assert str(resolve_out_dir(None, {})) == "uapprox-out"

    def test_schema_is_closed(self):
        assert CONFIG_SCHEMA["additionalProperties"] is False


class TestExitCodes:
    def test_unknown_key(self, tmp_path):
        assert run_cli(tmp_path, {**GREEDY, "bogus": 1})[0] == 2

    def test_empty_target(self, tmp_path):
        cfg = {"command": "construct", "target": {}, "params": {"construction": "squashing-step", "eps": 0.2}}
        assert run_cli(tmp_path, cfg)[0] == 2

    def test_bad_eps(self, tmp_path):
        cfg = {"command": "construct", "params": {"construction": "cosine", "M": 3.0, "eps": 1.5}}
        assert run_cli(tmp_path, cfg)[0] == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["greedy", "--config", str(tmp_path / "nope.json")]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_vanishing_derivative(self, tmp_path, capsys):
        cfg = {"command": "construct", "activation": {"kind": "logistic"},
               "params": {"construction": "monomial", "n": 2, "b": 0.0}}
        assert run_cli(tmp_path, cfg)[0] == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "PreconditionError" and err["exit_code"] == 2

    def test_unreachable_levels_is_numerical(self, tmp_path):
        cfg = {"command": "construct", "target": {"type": "polynomial", "coeffs": [0.5]},
               "params": {"construction": "squashing-step", "eps": 0.2}}
        assert run_cli(tmp_path, cfg)[0] == 3

    def test_corrupted_inequality_data(self, tmp_path, capsys):
        cfg = {"command": "check", "params": {"inequality": "holder", "p": 2,
                                              "data": {"f": [1, 0], "g": [1, 1], "weights": [1, -1]}}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 4
        assert json.loads((out / "report.json").read_text())["violations"] == 1
        assert json.loads(capsys.readouterr().err)["error"] == "CertificateViolation"


class TestCommands:
    def test_greedy_outputs(self, tmp_path):
        code, out = run_cli(tmp_path, GREEDY)
        assert code == 0
        raw = (out / "trace.csv").read_bytes()
        assert raw.startswith(b"step,atom,alpha,error,bound,rho,q,r\r\n")
        assert b"\n" not in raw.replace(b"\r\n", b"")
        summary = json.loads((out / "summary.json").read_text())
        assert summary["final_error"] <= summary["final_bound"]
        assert (out / "net.json").exists()

    def test_deterministic(self, tmp_path):
        run_cli(tmp_path, GREEDY, out="a")
        run_cli(tmp_path, GREEDY, out="b")
        for name in ("trace.csv", "summary.json", "net.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_flag_changes_output(self, tmp_path):
        run_cli(tmp_path, GREEDY, "--seed", "1", out="a")
        run_cli(tmp_path, GREEDY, "--seed", "2", out="b")
        assert (tmp_path / "a" / "trace.csv").read_bytes() != (tmp_path / "b" / "trace.csv").read_bytes()

    def test_construct_squashing_step(self, tmp_path):
        cfg = {"command": "construct", "target": {"type": "builtin", "name": "clamp"},
               "domain": {"lo": [-3.0], "hi": [4.0]}, "params": {"construction": "squashing-step", "eps": 0.25}}
        code, out = run_cli(tmp_path, cfg)
        summary = json.loads((out / "summary.json").read_text())
        assert code == 0 and summary["terms"] == 9 and summary["sup_error"] <= 0.25

    def test_construct_vandermonde(self, tmp_path):
        cfg = {"command": "construct", "params": {"construction": "vandermonde", "r": 1, "s": 1,
                                                  "betas": [1, -1, 2]}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        np.testing.assert_allclose(json.loads((out / "coeffs.json").read_text())["c"], [0.25, -0.25, 0], atol=1e-15)

    def test_construct_staircase(self, tmp_path):
        cfg = {"command": "construct", "target": {"type": "points", "x": [0, 1, 2], "y": [1, 3, 2]},
               "params": {"construction": "staircase"}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0 and json.loads((out / "summary.json").read_text())["residual"] == 0.0

    def test_sweep(self, tmp_path):
        cfg = {"command": "sweep", "resolution": 65,
               "params": {"algorithm": "maurey", "dictionary": "orthonormal", "weights": "random",
                          "m": 6, "steps": 10, "runs": 3}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        lines = (out / "rates.csv").read_bytes().split(b"\r\n")
        assert lines[0] == b"run,slope,intercept,r_squared" and len([l for l in lines if l]) == 4

    def test_rbf(self, tmp_path):
        cfg = {"command": "rbf", "params": {"n_list": [4, 8, 16], "sigma": 0.2}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        assert (out / "errors.csv").read_bytes().startswith(b"n,error\r\n4,")

    def test_jackson(self, tmp_path):
        cfg = {"command": "jackson", "params": {"n_list": [8, 16, 32], "r": 2}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["max_tail"] <= 1e-8 and summary["fit"]["slope"] < -1.5

    def test_check_random(self, tmp_path):
        cfg = {"command": "check", "params": {"inequality": "clarkson", "instances": 50}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0 and json.loads((out / "report.json").read_text())["violations"] == 0


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "uapprox.cli", "check", "--out", str(tmp_path),
                           "--set", "params.inequality=holder", "--set", "params.instances=5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["violations"] == 0
