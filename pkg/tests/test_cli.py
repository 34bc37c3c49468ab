import json
import subprocess
import sys
from pathlib import Path

import pytest

from exppoly.cli import main, parse_grid
from exppoly.errors import ParseError

MODELS = Path(__file__).resolve().parent.parent / "models"
LIN = MODELS / "linear_times_two.json"


def run(*args):
    return main([str(a) for a in args])


def write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def test_synth_linear_times_two(tmp_path, capsys):
    assert run("synth", "--model", LIN, "--grid", "box:0..4") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "a1,re,im"
    assert [tuple(float(v) for v in ln.split(",")[:2]) for ln in lines[1:]] == [
        (0, 1), (1, 4), (2, 12), (3, 32), (4, 80)
    ]


def test_synth_trivial_models(tmp_path):
    empty = write(tmp_path / "empty.json", {"dim": 1, "components": []})
    out = tmp_path / "e.csv"
    assert run("synth", "--model", empty, "--grid", "box:0..2", "--out", out) == 0
    assert out.read_text().splitlines()[1:] == ["0,0.0,0.0", "1,0.0,0.0", "2,0.0,0.0"]
    const = write(tmp_path / "c.json", {"dim": 2, "components": [
        {"omega": [[0, 0], [0, 0]], "poly": {"terms": [{"exp": [0, 0], "re": 1, "im": 0}]}}]})
    out = tmp_path / "c.csv"
    assert run("synth", "--model", const, "--grid", "box:0..1,0..1", "--out", out) == 0
    rows = out.read_text().splitlines()
    assert rows[1:] == ["0,0,1.0,0.0", "1,0,1.0,0.0", "0,1,1.0,0.0", "1,1,1.0,0.0"]


def test_synth_rejects_bad_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert run("synth", "--model", bad, "--grid", "box:0..2") == 2
    dup = write(tmp_path / "dup.json", {"dim": 1, "components": [
        {"omega": [[0, 1]], "poly": {"terms": [{"exp": [0], "re": 1, "im": 0}]}},
        {"omega": [[0, 1 + 2 * 3.141592653589793]], "poly": {"terms": [{"exp": [0], "re": 2, "im": 0}]}}]})
    assert run("synth", "--model", dup, "--grid", "box:0..2") == 2
    assert run("synth", "--model", LIN, "--grid", "box:0..2,0..2") == 2


def test_parse_grid():
    assert parse_grid("box:0..4") == ((0,), (4,))
    assert parse_grid("box:-1..2,0..3") == ((-1, 0), (2, 3))
    with pytest.raises(ParseError):
        parse_grid("0..4")
    with pytest.raises(ParseError):
        parse_grid("box:3..1")


@pytest.fixture
def lin_samples(tmp_path):
    path = tmp_path / "s.csv"
    assert run("synth", "--model", LIN, "--grid", "box:0..8", "--out", path) == 0
    return path


def test_reconstruct_round_trip(tmp_path, lin_samples):
    out = tmp_path / "r.json"
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 3, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["dim"] == 1 and len(doc["components"]) == 1
    comp = doc["components"][0]
    assert comp["omega"][0][0] == pytest.approx(0.6931471805599453, abs=1e-6)
    coeffs = {tuple(t["exp"]): t["re"] for t in comp["poly"]["terms"]}
    assert coeffs[(0,)] == pytest.approx(1, abs=1e-6) and coeffs[(1,)] == pytest.approx(1, abs=1e-6)
    assert doc["ideal"]["normal_set"] == [[0], [1]]
    assert doc["ideal"]["hilbert_trace"] == [[0, 1], [1, 2], [2, 2]]
    assert doc["clusters"][0]["mult"] == 2 and doc["clusters"][0]["deg_bound"] == 1
    assert doc["report"]["resynthesis_error"] <= 1e-9
    assert set(doc) >= {"dim", "components", "ideal", "clusters", "report"}


def test_reconstruct_exit_codes(tmp_path, lin_samples):
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 1) == 4
    bad = tmp_path / "bad.csv"
    bad.write_text("a1,re,im\n0,1.0,zz\n", encoding="utf-8")
    assert run("reconstruct", "--samples", bad, "--mult-bound", 2) == 2
    small = tmp_path / "small.csv"
    assert run("synth", "--model", LIN, "--grid", "box:0..2", "--out", small) == 0
    assert run("reconstruct", "--samples", small, "--mult-bound", 2) == 3
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 0) == 2
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 2, "--tol", -1) == 2
    assert run("reconstruct", "--samples", tmp_path / "missing.csv", "--mult-bound", 2) == 2


def test_verify_kernels(tmp_path, capsys):
    model = write(tmp_path / "k2k.json", {"dim": 1, "components": [
        {"omega": [[0.6931471805599453, 0]], "poly": {"terms": [{"exp": [1], "re": 1, "im": 0}]}}]})
    samples = tmp_path / "k2k.csv"
    assert run("synth", "--model", model, "--grid", "box:0..8", "--out", samples) == 0
    good = write(tmp_path / "good.json", {"kernel": [{"terms": [
        {"exp": [0], "re": 4, "im": 0}, {"exp": [1], "re": -4, "im": 0}, {"exp": [2], "re": 1, "im": 0}]}]})
    capsys.readouterr()
    assert run("verify", "--samples", samples, "--ideal", good) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    bad = write(tmp_path / "bad.json", {"kernel": [{"terms": [
        {"exp": [0], "re": -3, "im": 0}, {"exp": [1], "re": 1, "im": 0}]}]})
    assert run("verify", "--samples", samples, "--ideal", bad) == 1
    assert capsys.readouterr().out.rstrip().endswith("FAIL")
    empty = write(tmp_path / "empty.json", {"kernel": []})
    assert run("verify", "--samples", samples, "--ideal", empty) == 0
    assert "empty kernel" in capsys.readouterr().out


def test_stirling_command(tmp_path, capsys):
    assert run("stirling", "--kind", 2, "--nu", "3,2", "--kappa", "2,1") == 0
    assert capsys.readouterr().out == "3\n"
    assert run("stirling", "--kind", 1, "--nu", "3", "--kappa", "2") == 0
    assert capsys.readouterr().out == "-3\n"
    assert run("stirling", "--table", "--dim", 1, "--max", 2, "--kind", 1) == 0
    assert capsys.readouterr().out.splitlines() == [
        "nu1,kappa1,value", "0,0,1", "1,0,0", "1,1,1", "2,0,0", "2,1,-1", "2,2,1"
    ]
    assert run("stirling", "--nu", "1,2", "--kappa", "1") == 2
    assert run("stirling", "--nu", "1,x", "--kappa", "1,1") == 2


@pytest.mark.parametrize(
    "name,box,bound",
    [
        ("linear_times_two", "box:0..8", 2),
        ("two_tones", "box:0..8", 2),
        ("bivariate_mixed", "box:0..12,0..12", 6),
        ("trivariate_simple", "box:0..6,0..6,0..6", 3),
    ],
)
def test_bundled_models_compose(tmp_path, name, box, bound):
    samples, out = tmp_path / "s.csv", tmp_path / "o.json"
    assert run("synth", "--model", MODELS / f"{name}.json", "--grid", box, "--out", samples) == 0
    assert run("reconstruct", "--samples", samples, "--mult-bound", bound, "--out", out) == 0
    assert run("verify", "--samples", samples, "--model", out, "--ideal", out, "--out", tmp_path / "v.txt") == 0
    assert (tmp_path / "v.txt").read_text().rstrip().endswith("PASS")


def test_outputs_byte_identical_via_entry_point(tmp_path, lin_samples):
    cmd = [sys.executable, "-m", "exppoly", "reconstruct", "--samples", str(lin_samples), "--mult-bound", "3"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"{")


def test_seed_from_environment(tmp_path, lin_samples, monkeypatch):
    monkeypatch.setenv("EXPPOLY_SEED", "11")
    out = tmp_path / "r.json"
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 3, "--out", out) == 0
    assert json.loads(out.read_text())["report"]["seed"] == 11
    monkeypatch.setenv("EXPPOLY_SEED", "eleven")
    assert run("reconstruct", "--samples", lin_samples, "--mult-bound", 3) == 2
