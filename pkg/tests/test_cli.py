import json

import pytest

from fockbell.cli import RunConfig, main, read_config, run


def test_amplitudes_csv(tmp_path, capsys):
    out = tmp_path / "amp.csv"
    code = main(["amplitudes", "--alpha-step", "0.05", "--crosscheck-every", "4", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# tool: fockbell")
    assert "# summary: PASS" in text
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header.split(",")[:4] == ["alpha", "alpha_sq", "A_R", "A_T"]


def test_json_format(tmp_path):
    out = tmp_path / "w.json"
    assert main(["witness", "--alpha-step", "0.1", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["summary"]["passed"] and doc["config"]["command"] == "witness"
    assert len(doc["records"]) == 16


@pytest.mark.parametrize("cmd", ["chsh", "classical", "povm-check"])
def test_other_commands_pass(cmd, tmp_path):
    args = [cmd, "--out", str(tmp_path / "x.csv")]
    if cmd != "povm-check":
        args += ["--alpha-step", "0.1", "--crosscheck-every", "5"]
    assert main(args) == 0


def test_ch_optimize_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["ch-optimize", "--starts", "16", "--out", str(a)]) == 0
    assert main(["ch-optimize", "--starts", "16", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert main(["replay", str(a), "--out", str(c)]) == 0
    assert c.read_bytes() == a.read_bytes()
    assert read_config(str(a)).starts == 16


def test_hardy_q_is_exploratory(tmp_path):
    out = tmp_path / "q.json"
    assert main(["ch-optimize", "--hardy-q", "0.3", "--starts", "2", "--format", "json",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert "exploratory" in doc["notes"]
    assert [c["claim"] for c in doc["summary"]["claims"]] == ["upper CH bound never exceeded"]


def test_claim_failure_exit_code(tmp_path, capsys):
    # a tolerance no cross-check can meet
    code = main(["amplitudes", "--alpha-step", "0.5", "--tolerance", "1e-30",
                 "--out", str(tmp_path / "f.csv")])
    assert code == 1
    assert "claim failed" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["amplitudes", "--alpha-step", "-1"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["ch-optimize", "--hardy-q", "1.5"]) == 2
    assert main(["witness", "--alpha-max", "2.0", "--cutoff", "3"]) == 2


def test_sweep_small(tmp_path):
    cfg = RunConfig("ch-sweep", grid=3, starts=2, alpha_min=0.0, alpha_max=0.7, cells="diagonal")
    doc = run(cfg)
    assert doc.passed
    assert len(doc.records) == 3
