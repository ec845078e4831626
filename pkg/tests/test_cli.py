import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from topogen.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm(capsys):
    code, out, _ = call(capsys, "norm", "--x", "1/8", "--weights", "harmonic")
    rep = json.loads(out)
    assert code == 0
    assert rep["value"] == "1/3" and rep["witness"] == {"3": 1}


def test_norm_check_and_circle(capsys):
    code, out, _ = call(capsys, "norm", "--x", "15/16", "--circle", "--check")
    rep = json.loads(out)
    assert code == 0 and rep["oracle_agrees"] is True
    assert rep["circle_norm"] == "1/4"


def test_norm_rejects_non_dyadic(capsys):
    code, _, err = call(capsys, "norm", "--x", "1/3")
    assert code == 2 and "error" in err


def test_weights_validate(capsys, tmp_path):
    code, out, _ = call(capsys, "weights-validate", "--weights", "harmonic")
    rep = json.loads(out)
    assert code == 0 and rep["diverges"] is True
    code, out, _ = call(capsys, "weights-validate", "--weights", "geometric:3/4")
    assert code == 0 and json.loads(out)["diverges"] is False
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,1/4\n")
    code, out, _ = call(capsys, "weights-validate", "--weights", str(bad), "--window", "0,1")
    assert code == 1


def test_genpair_json_and_csv(capsys, tmp_path):
    table = tmp_path / "g.csv"
    code, out, _ = call(
        capsys, "genpair", "--g0", "3/2", "--h0", "1/2", "--N", "3", "--targets", "1/4,1/8", "--csv", str(table)
    )
    rep = json.loads(out)
    assert code == 0
    assert rep["certificate"]["beta"] == 9 and (rep["certificate"]["u"], rep["certificate"]["v"]) == (5, -7)
    assert rep["targets"]["1/2^2"] == [20, -28]
    rows = list(csv.DictReader(table.open(newline="")))
    assert [r["N"] for r in rows] == ["0", "0", "1", "1", "2", "2", "3", "3"]
    last = rows[-2]
    assert (last["target"], last["u"], last["v"]) == ("1/2^2", "20", "-28")
    assert b"\r\n" not in table.read_bytes()


def test_genpair_zero_g0(capsys):
    code, _, err = call(capsys, "genpair", "--g0", "0", "--h0", "1/2", "--N", "3")
    assert code == 2


def test_genpair_uncertifiable_rows(capsys):
    code, out, _ = call(capsys, "genpair", "--g0", "1", "--h0", "1/2", "--N", "2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[1][3] == "no_certificate:gcd=2"
    code, _, err = call(capsys, "genpair", "--g0", "1", "--h0", "1/2", "--N", "0")
    assert code == 1 and "gcd" in err


def test_kronecker(capsys):
    code, out, _ = call(capsys, "kronecker", "--basis", "1,sqrt2", "--coords", "0,1", "--K", "1000")
    rep = json.loads(out)
    assert code == 0 and rep["generator"] is True and rep["rank"] == 2
    code, out, _ = call(capsys, "kronecker", "--basis", "1", "--coords", "1/3", "--K", "100")
    rep = json.loads(out)
    assert rep["generator"] is False


def test_kronecker_csv(capsys):
    code, out, _ = call(capsys, "kronecker", "--basis", "1,sqrt2", "--coords", "0,1", "--K", "1000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["K"] for r in rows] == ["1", "10", "100", "1000"]
    radii = [float(r["covering_radius"]) for r in rows]
    assert radii == sorted(radii, reverse=True) and radii[-1] < 0.005


def test_escape(capsys):
    code, out, _ = call(capsys, "escape", "--lambda", "harmonic", "--eps", "1/5", "--N", "3")
    rep = json.loads(out)
    assert code == 0
    assert rep["blocks"] == [[11, 12], [13, 14], [15, 16]]
    assert rep["block_values"] == ["23/132", "27/182", "31/240"]
    assert rep["distance_ge_lower_bound"] is True and rep["generators_inside_eps_ball"] is True


def test_escape_rejects_other_lambda(capsys):
    code, _, _ = call(capsys, "escape", "--lambda", "capped", "--eps", "1/5", "--N", "3")
    assert code == 2


def test_qna_check_writes_report(capsys, tmp_path):
    report = tmp_path / "qna.json"
    code, _, _ = call(
        capsys, "qna-check", "--model", "du:12", "--eps", "1/4", "--k", "3", "--L", "8",
        "--trials", "100", "--seed", "7", "--out", str(report),
    )
    rep = json.loads(report.read_text())
    assert code == 0 and rep["ok"] is True and rep["passes"] == 100


def test_so3_cover(capsys):
    code, out, _ = call(capsys, "so3-cover", "--pair", "x:0.3,z:0.3", "--L", "4", "--net", "300", "--seed", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [r["L"] for r in rows] == ["0", "1", "2", "3", "4"]
    radii = [float(r["covering_radius"]) for r in rows]
    assert radii == sorted(radii, reverse=True)


def test_unknown_subcommand(capsys):
    code, _, err = call(capsys, "frobnicate")
    assert code == 2 and "usage" in err


def test_deterministic_outputs(tmp_path):
    digests = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        assert run(["so3-cover", "--pair", "x:0.3,z:0.3", "--L", "5", "--net", "500", "--seed", "2", "--out", str(out)]) == 0
        esc = tmp_path / f"esc{i}.json"
        assert run(["escape", "--eps", "1/10", "--N", "20", "--out", str(esc)]) == 0
        digests.append((hashlib.sha256(out.read_bytes()).hexdigest(), hashlib.sha256(esc.read_bytes()).hexdigest()))
    assert digests[0] == digests[1]


def test_console_module_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "topogen", "norm", "--x", "3/4"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == "3/2"
