import hashlib
import json
import subprocess
import sys

import pytest

from anosovlab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_IO, EXIT_OK, main


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(*args):
    return main([str(a) for a in args])


def test_gaps_fuchsian_json(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run("gaps", "--family", "fuchsian", "--max-len", 3, "--format", "json", "--out", out) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["epsilon"] == pytest.approx(1.0, abs=1e-9) and data["anosov"]
    assert len(data["rows"]) == 8 + 8 * 7 + 8 * 49
    assert "Anosov" in capsys.readouterr().err


def test_gaps_flags_non_anosov(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert run("gaps", "--family", "psi", "--t", 0.2, "--max-len", 5, "--out", out) == EXIT_OK
    assert "not 1-Anosov" in capsys.readouterr().err
    assert out.read_text().splitlines()[0] == "word,len_X,stable_len,log_s1s2,log_l1l2"


def test_gaps_bad_k():
    assert run("gaps", "--family", "fuchsian", "--k", 2) == EXIT_CONFIG


def test_exponent_outputs(tmp_path):
    out = tmp_path / "e.json"
    assert run("exponent", "--family", "sym3", "--max-len", 4, "--out", out) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["alpha"]["estimate"] == pytest.approx(1.0, abs=1e-9)
    assert data["inverse_exponent"] == pytest.approx(1.0, abs=1e-9)
    assert data["alpha"]["curve"][0][0] == 1


def test_conjugation_exponent(tmp_path):
    out = tmp_path / "c.json"
    assert run("exponent", "--conjugation", "sym3", "dsum1", "--max-len", 4, "--out", out) == EXIT_OK
    assert json.loads(out.read_text())["report"]["estimate"] == pytest.approx(0.5, abs=1e-9)


def test_verify_pass_and_fail(tmp_path):
    out = tmp_path / "v.json"
    assert run("verify", "relator", "--out", out) == EXIT_OK
    assert json.loads(out.read_text())["pass"] is True
    assert run("verify", "lemma32", "--trials", 2000, "--dim", 3, "--out", out) == EXIT_OK
    code = run("verify", "cor14", "--t", 1.0, "--m", 0, "--depth", 5, "--out", out)
    assert code == EXIT_FAIL
    assert json.loads(out.read_text())["pass"] is False


def test_limit_set_outputs(tmp_path, capsys):
    out = tmp_path / "l.json"
    assert run("limit-set", "--family", "dsum1", "--max-len", 3, "--format", "json", "--out", out) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["rank"] == 2 and data["spanning"] is False
    assert "NOT spanning" in capsys.readouterr().err
    svg = tmp_path / "l.svg"
    assert run("limit-set", "--family", "sym3", "--max-len", 3, "--format", "svg", "--out", svg) == EXIT_OK
    assert svg.read_text().lstrip().startswith("<?xml")


def test_family_experiment(tmp_path, capsys):
    out = tmp_path / "f.json"
    assert run("family-experiment", "--n-max", 40, "--format", "json", "--out", out) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["verdict"] == "Growing" and len(data["rows"]) == 41
    assert "r_40/r_10" in capsys.readouterr().err
    assert run("family-experiment", "--s", 0) == EXIT_CONFIG


def test_family_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"s": 2.0, "t": -0.1, "X": [[1, 1], [0, 1]]}))
    out = tmp_path / "rep.json"
    assert run("export-rep", "--family", "family-st", "--config", cfg, "--out", out) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["degree"] == 4
    assert rep["generators"]["b1"][0][2:] == [2.0, 2.0]


def test_rep_json_round_trip(tmp_path):
    rep_file = tmp_path / "rep.json"
    assert run("export-rep", "--family", "sym3", "--out", rep_file) == EXIT_OK
    out = tmp_path / "e.json"
    assert run("exponent", "--rep-json", rep_file, "--max-len", 6, "--out", out) == EXIT_OK
    # plain 4x4 matrices lose the functor structure; products of the Sym^3
    # images are ill conditioned, so agreement is to about 1e-8
    assert json.loads(out.read_text())["alpha"]["estimate"] == pytest.approx(1.0, abs=1e-7)


def test_free_group_rep_json_uses_tree(tmp_path):
    rep_file = tmp_path / "free.json"
    rep_file.write_text(json.dumps({"generators": {"a": [[3, 0], [0, 0.3333333333333333]], "b": [[1.6666666666666667, 1.3333333333333333], [1.3333333333333333, 1.6666666666666667]]}}))
    out = tmp_path / "g.csv"
    assert run("gaps", "--rep-json", rep_file, "--max-len", 2, "--out", out) == EXIT_OK
    assert run("gaps", "--rep-json", rep_file, "--model", "fuchsian") == EXIT_CONFIG


@pytest.mark.parametrize(
    "args",
    [
        ["gaps", "--family", "nope"],
        ["gaps", "--config", "/nonexistent/cfg.json"],
        ["gaps", "--rep-json", "/nonexistent/rep.json"],
        ["limit-set", "--max-len", "0"],
        ["gaps", "--max-len", "-1"],
        ["verify", "nosuchsuite"],
        ["frobnicate"],
        ["gaps", "--family", "fuchsian", "--model", "tree"],
    ],
)
def test_config_errors(args):
    assert main(args) == EXIT_CONFIG


def test_bad_json_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run("gaps", "--config", cfg) == EXIT_CONFIG


def test_io_error(tmp_path):
    assert run("gaps", "--max-len", 1, "--out", tmp_path / "missing" / "x.csv") == EXIT_IO


@pytest.mark.parametrize(
    "args",
    [
        ["gaps", "--family", "family-st", "--max-len", "4", "--format", "csv"],
        ["limit-set", "--family", "sym3", "--max-len", "4", "--format", "svg"],
        ["family-experiment", "--n-max", "20", "--format", "svg"],
        ["verify", "lemma32", "--trials", "3000", "--seed", "7"],
        ["verify", "equivariance", "--trials", "50", "--seed", "3"],
    ],
)
def test_repeat_runs_are_identical(tmp_path, args):
    hashes = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert main(args + ["--out", str(out)]) == EXIT_OK
        hashes.append(digest(out))
    assert hashes[0] == hashes[1]


def test_seed_changes_random_suites(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("verify", "lemma32", "--trials", 1000, "--seed", 1, "--out", a)
    run("verify", "lemma32", "--trials", 1000, "--seed", 2, "--out", b)
    assert digest(a) != digest(b)


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "anosovlab.cli", "verify", "relator", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["pass"] is True
