import json

import numpy as np
import pytest

import community_sdp as cs
from community_sdp import cli, matio


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def make_clique_file(tmp_path):
    """Noiseless 6-node instance with a planted 3-clique."""
    inst = cs.gen_instance(
        cs.ModelSpec(kind=cs.Kind.BERNOULLI, n=6, K=3, p=1.0, q=0.0), seed=42
    )
    matio.write_instance(tmp_path / "inst", inst)
    return inst


class TestGenerate:
    def test_gaussian(self, tmp_path, capsys):
        code, out, _ = run_cli(
            [
                "generate",
                "--model",
                "gaussian",
                "--n",
                "12",
                "--k",
                "3",
                "--mu",
                "2.0",
                "--seed",
                "5",
                "--out",
                str(tmp_path / "g"),
            ],
            capsys,
        )
        assert code == 0
        back = matio.read_instance(tmp_path / "g")
        assert back.spec.n == 12 and back.seed == 5

    def test_sbm(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["generate", "--model", "sbm", "--n", "12", "--r", "3", "--p", "0.9", "--q", "0.1", "--seed", "1", "--out", str(tmp_path / "s")],
            capsys,
        )
        assert code == 0
        back = matio.read_instance(tmp_path / "s")
        assert len(back.truth) == 3

    def test_usage_error_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["generate", "--model", "gaussian", "--n", "12", "--out", "x"])
        assert exc.value.code == 2


class TestSolve:
    def test_noiseless_clique(self, tmp_path, capsys):
        inst = make_clique_file(tmp_path)
        code, out, _ = run_cli(
            ["solve", "--in", str(tmp_path / "inst.mtx"), "--k", "3"], capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "optimal"
        assert payload["objective"] == pytest.approx(6.0, abs=1e-6)
        assert tuple(payload["rounded_support"]) == inst.truth

    def test_writes_outputs(self, tmp_path, capsys):
        make_clique_file(tmp_path)
        code, _, _ = run_cli(
            ["solve", "--in", str(tmp_path / "inst.mtx"), "--k", "3", "--out", str(tmp_path / "sol")],
            capsys,
        )
        assert code == 0
        assert (tmp_path / "sol.mtx").exists()
        assert json.loads((tmp_path / "sol.json").read_text())["status"] == "optimal"

    def test_runtime_error_exit_1(self, tmp_path, capsys):
        code, _, err = run_cli(["solve", "--in", str(tmp_path / "missing.mtx"), "--k", "3"], capsys)
        assert code == 1
        assert "error" in json.loads(err)


class TestCertify:
    def test_accepts_noiseless(self, tmp_path, capsys):
        make_clique_file(tmp_path)
        code, out, _ = run_cli(
            ["certify", "--instance", str(tmp_path / "inst"), "--out", str(tmp_path / "cert")],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "accept"
        assert (tmp_path / "cert.S.mtx").exists()
        assert (tmp_path / "cert.B.mtx").exists()
        assert (tmp_path / "cert.D.mtx").exists()


class TestVm:
    def test_a1_is_zero(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        M = (rng.random((10, 10)) < 0.5).astype(float)
        M = np.triu(M, 1)
        M = M + M.T
        matio.write_matrix(tmp_path / "M.mtx", M)
        code, out, _ = run_cli(["vm", "--in", str(tmp_path / "M.mtx"), "--a", "1"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["values"][0]["value"] == pytest.approx(0.0, abs=1e-7)

    def test_requires_a(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["vm", "--in", "whatever.mtx"])
        assert exc.value.code == 2


class TestSweepReport:
    def test_end_to_end(self, tmp_path, capsys):
        cfg = {
            "model": {"kind": "bernoulli", "n": 8, "K": 3, "p": 1.0, "q": 0.0},
            "axes": [],
            "trials": 2,
            "algorithms": ["sdp"],
            "seed0": 3,
            "out": str(tmp_path / "sweep.csv"),
        }
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code, out, _ = run_cli(["sweep", "--config", str(tmp_path / "cfg.json")], capsys)
        assert code == 0
        code, out, _ = run_cli(
            ["report", "--in", str(tmp_path / "sweep.csv"), "--out", str(tmp_path / "rep.csv")],
            capsys,
        )
        assert code == 0
        text = (tmp_path / "rep.csv").read_text()
        assert "sdp_rate" in text
        assert ",1," in text or ",1\n" in text.replace("\r", "")
