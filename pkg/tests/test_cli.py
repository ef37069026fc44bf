import io
import json
import math
import subprocess
import sys

import pytest

from upjanson.cli import EXIT_FAIL, EXIT_OK, EXIT_TOO_LARGE, EXIT_USAGE, main
from upjanson.instance import generate, serialize_instance


def run(argv, stdin="", monkeypatch=None, capsys=None):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def k4_text():
    return serialize_instance(generate("subgraph-count", {"graph": "triangle", "n": 4, "p": 0.5}))


@pytest.fixture
def cli(monkeypatch, capsys):
    def call(argv, stdin=""):
        return run(argv, stdin, monkeypatch, capsys)
    return call


def test_compute_machine_k4(cli, k4_text):
    code, out, _ = cli(["compute", "-", "--format", "machine"], k4_text)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["summary"]["mu"] == 0.5 and doc["summary"]["delta"] == 0.375
    assert doc["instance"] == {"n": 6, "k": 4, "support": 6, "weighted": False}
    pr0 = doc["bounds"]["pr_zero"]
    assert abs(pr0["i1"]["raw"] - math.exp(-0.5 + 0.1875)) < 1e-12
    assert abs(pr0["i1a"]["raw"] - (7 / 8) ** 4 * math.exp(3 / 14)) < 1e-12
    assert abs(pr0["i2a"]["raw"] - math.exp(-23 / 64)) < 1e-12
    assert abs(pr0["lower-bound"]["raw"] - (7 / 8) ** 4) < 1e-12
    assert [r["fraction"] for r in doc["bounds"]["lower_tail"]["i2-phi"]] == [0.25, 0.5, 0.75, 1.0]


def test_compute_from_file_and_table(cli, k4_text, tmp_path):
    path = tmp_path / "k4.json"
    path.write_text(k4_text)
    code, out, _ = cli(["compute", str(path)])
    assert code == EXIT_OK
    assert "instance: n=6 k=4 support=6 weighted=no" in out
    assert "mu=0.500000 delta=0.375000" in out


def test_machine_output_is_byte_stable(cli, k4_text):
    a = cli(["verify", "-", "--format", "machine"], k4_text)[1]
    b = cli(["verify", "-", "--format", "machine"], k4_text)[1]
    assert a == b


def test_verify_k4(cli, k4_text):
    code, out, _ = cli(["verify", "-", "--format", "machine"], k4_text)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["oracle"]["pr_zero"] == pytest.approx(41 / 64, abs=1e-15)
    assert doc["oracle"]["distribution"] == [[0.0, 41 / 64], [1.0, 0.25], [2.0, 6 / 64], [4.0, 1 / 64]]
    assert len(doc["checks"]["aim"]) == 6
    assert doc["checks"]["axioms"]["passed"] is True


def test_verify_table(cli, k4_text):
    code, out, _ = cli(["verify", "-", "--t-grid", "0.5,1"], k4_text)
    assert code == EXIT_OK
    assert "result: PASS" in out and "oracle" in out


def test_custom_t_grid(cli, k4_text):
    code, out, _ = cli(["compute", "-", "--t-grid", "0.1", "--format", "machine"], k4_text)
    assert code == EXIT_OK
    rows = json.loads(out)["bounds"]["lower_tail"]["i2-phi"]
    assert [r["t"] for r in rows] == [pytest.approx(0.05)]


def test_generate_then_verify(cli, tmp_path):
    path = tmp_path / "dnf.json"
    code, _, _ = cli(["generate", "random-monotone-dnf", "--n", "10", "--k", "5",
                      "--weights", "0.5,3", "--seed", "7", "-o", str(path)])
    assert code == EXIT_OK
    code, out, _ = cli(["verify", str(path), "--format", "machine"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["instance"]["weighted"] is True
    assert "i1" not in doc["bounds"]["pr_zero"]


@pytest.mark.parametrize(
    "argv",
    [
        ["generate", "subgraph-count", "--n", "5", "--graph", "path2", "--p", "0.3"],
        ["generate", "threshold", "--n", "5", "--r", "3"],
        ["generate", "threshold", "--n", "6", "--k", "3", "--r", "4", "--threshold", "2", "--p", "0.2,0.8"],
        ["generate", "subgraph-count", "--n", "4", "--graph", "0-1,1-2"],
    ],
)
def test_generate_stdout(cli, argv):
    code, out, _ = cli(argv)
    assert code == EXIT_OK
    code2, _, _ = cli(["verify", "-"], out)
    assert code2 == EXIT_OK


@pytest.mark.parametrize(
    "argv, stdin",
    [
        (["compute", "-"], "{not json"),
        (["compute", "/nonexistent/file.json"], ""),
        (["compute", "-", "--t-grid", "2"], ""),
        (["compute", "-", "--mc-samples", "0"], ""),
        (["frobnicate"], ""),
        (["generate", "threshold", "--n", "2", "--r", "3"], ""),
        (["generate", "subgraph-count", "--n", "4", "--graph", "banana"], ""),
    ],
)
def test_usage_errors(cli, argv, stdin):
    try:
        code = cli(argv, stdin)[0]
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def _unsound_text():
    # two events sharing coordinate 0 but declared independent
    doc = {
        "n": 3,
        "p": [0.5, 0.5, 0.5],
        "events": [{"minsets": [[0, 1]]}, {"minsets": [[0, 2]]}],
        "dependency": [],
    }
    return json.dumps(doc)


def test_unsound_relation_exits_2(cli):
    code, out, err = cli(["compute", "-"], _unsound_text())
    assert code == EXIT_FAIL
    assert "--force" in err and out == ""


def test_force_computes(cli):
    code, out, _ = cli(["compute", "-", "--force", "--format", "machine"], _unsound_text())
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["dependency"]["validation"]["passed"] is False


def test_verify_unsound_fails(cli):
    code, out, _ = cli(["verify", "-", "--format", "machine"], _unsound_text())
    assert code == EXIT_FAIL
    assert json.loads(out)["passed"] is False


def test_too_large_exits_3(cli, k4_text):
    code, _, err = cli(["compute", "-", "--max-exact-support", "4"], k4_text)
    assert code == EXIT_TOO_LARGE
    assert "too-large-for-exact" in err and "--mc-samples" in err


def test_monte_carlo_path(cli, k4_text):
    argv = ["compute", "-", "--max-exact-support", "4", "--mc-samples", "20000", "--format", "machine"]
    code, out, _ = cli(argv, k4_text)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["summary"]["method"] == "monte-carlo"
    assert abs(doc["summary"]["mu"] - 0.5) < 0.05
    assert cli(argv, k4_text)[1] == out


def test_verify_statistical(cli, k4_text):
    argv = ["verify", "-", "--max-exact-support", "4", "--mc-samples", "20000", "--format", "machine"]
    code, out, _ = cli(argv, k4_text)
    doc = json.loads(out)
    assert doc["oracle"]["method"] == "statistical"
    assert code == EXIT_OK


def test_module_entry_point(k4_text):
    proc = subprocess.run([sys.executable, "-m", "upjanson", "compute", "-"], input=k4_text,
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "mu=0.500000" in proc.stdout
