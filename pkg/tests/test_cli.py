import json
from pathlib import Path

import pytest

from tvkit.cli import parse_grid, run
from tvkit.errors import InputError


def run_ok(tmp_path, *argv):
    out, err = [], []

    class W:
        def __init__(self, buf):
            self.buf = buf

        def write(self, s):
            self.buf.append(s)

        def flush(self):
            pass

    code = run(list(argv) + ["--out", str(tmp_path)], stdout=W(out), stderr=W(err))
    return code, "".join(out).strip(), "".join(err)


def test_modulus_example(tmp_path):
    code, path, _ = run_ok(tmp_path, "modulus", "--poly", "0,0,1", "--density", "gauss", "--u", "1e-4:1:30")
    assert code == 0
    d = Path(path)
    assert d.parent == tmp_path and d.name.startswith("modulus-")
    rep = json.loads((d / "report.json").read_text())
    assert rep["fit"]["alpha"] == pytest.approx(0.5, abs=0.05)
    csv = (d / "curve.csv").read_bytes()
    assert csv.startswith(b"u,delta,error_estimate\n") and b"\r" not in csv
    assert len(csv.splitlines()) == 31
    assert (d / "plot.dat").read_text().startswith("# delta\n")
    assert (d / "timing.json").exists()


def test_bound_example(tmp_path):
    code, path, _ = run_ok(tmp_path, "bound", "--f", "0,0,1", "--g", "0,0.1,1", "--density", "gauss")
    assert code == 0
    rep = json.loads((Path(path) / "report.json").read_text())
    assert rep["bound"]["l1"] == pytest.approx(0.0797885, abs=1e-7)
    assert rep["tv_le_bound"] is True


def test_experiment_example(tmp_path):
    code, path, _ = run_ok(tmp_path, "experiment", "gauss-poly", "--m", "2", "--deltas", "1e-4:1e-1:10", "--seed", "7")
    assert code == 0
    rep = json.loads((Path(path) / "report.json").read_text())
    s = rep["slopes"]["log_tv_vs_log_delta"]["slope"]
    assert 1 / 3 - 0.05 <= s <= 1 / 2 + 0.1
    assert all(r["slack"] >= -1e-9 for r in rep["rows"])


@pytest.mark.parametrize("argv", [
    ["pushforward", "--poly", "0,0,1", "--t", "0.1:4:5"],
    ["pushforward", "--trig", "cos=0,1;sin=0,0,0.5"],
    ["tv", "--f", "0,0,1", "--g", "0.1,0,1", "--mc-samples", "20000", "--seed", "3"],
    ["tv", "--f", "1: 2 0; 1: 0 2", "--g", "1: 2 0; 1: 0 2; 0.2: 1 0", "--mc-samples", "20000"],
    ["certify", "--poly", "0,0,0,1", "--u", "1e-3:1:8"],
    ["experiment", "vandermonde", "--n-max", "4"],
    ["bound", "--f", "1: 2", "--g", "1: 2; 0.1: 1", "--mc-samples", "20000"],
])
def test_commands_succeed(tmp_path, argv):
    code, path, err = run_ok(tmp_path, *argv)
    assert code == 0, err
    assert (Path(path) / "report.json").exists()


@pytest.mark.parametrize("argv,code,token", [
    (["modulus", "--poly", "0,zz,1"], 2, "zz"),
    (["modulus", "--poly", "0,0,1", "--density", "cauchy"], 2, "cauchy"),
    (["modulus", "--poly", "0,0,1", "--density", "gauss:0,-1"], 2, "sigma"),
    (["modulus", "--poly", "0,0,1", "--u", "0:1:10"], 2, "'0'"),
    (["modulus", "--poly", "0,0,1", "--u", "1e-3:1:ten"], 2, "'ten'"),
    (["modulus", "--trig", "cos=1;tan=2"], 2, "tan=2"),
    (["modulus", "--poly", "3"], 2, ""),
    (["tv", "--f", "0,1", "--g", "0,1,inf"], 2, "inf"),
    (["tv", "--f", "0,1", "--g", "0,1", "--tol", "-1"], 2, "--tol"),
    (["certify", "--poly", "0,0,1", "--density", "lebesgue:0,1"], 2, "Gaussian"),
    (["experiment", "nope"], 2, ""),
    (["frobnicate"], 2, ""),
    (["modulus"], 2, ""),
])
def test_exit_code_matrix(tmp_path, argv, code, token, capsys):
    got, _, err = run_ok(tmp_path, *argv)
    assert got == code
    err = err + capsys.readouterr().err
    assert token in err


def test_numeric_failure_exit_code(tmp_path, monkeypatch):
    from tvkit import cli
    from tvkit.errors import NumericFailure

    def boom(args):
        raise NumericFailure("did not converge")

    monkeypatch.setitem(cli.COMMANDS, "tv", boom)
    code, _, err = run_ok(tmp_path, "tv", "--f", "0,1", "--g", "1,1")
    assert code == 3 and "did not converge" in err


def test_determinism_byte_identical(tmp_path):
    argv = ["tv", "--f", "0,0,1", "--g", "0.1,0,1", "--mc-samples", "30000", "--seed", "5"]
    _, p1, _ = run_ok(tmp_path, *argv)
    _, p2, _ = run_ok(tmp_path, *argv)
    assert p1 != p2
    for name in ("report.json", "curve.csv", "plot.dat"):
        assert (Path(p1) / name).read_bytes() == (Path(p2) / name).read_bytes()


def test_format_flag(tmp_path):
    _, p, _ = run_ok(tmp_path, "modulus", "--poly", "0,1", "--u", "1e-3:1e-1:9", "--format", "csv")
    names = sorted(x.name for x in Path(p).iterdir())
    assert names == ["curve.csv", "plot.dat", "timing.json"]


def test_parse_grid():
    assert parse_grid("1e-4:1:5", "--u")[0] == pytest.approx(1e-4)
    assert parse_grid("0.5", "--u").tolist() == [0.5]
    with pytest.raises(InputError, match="lo:hi:points"):
        parse_grid("1:2", "--u")
