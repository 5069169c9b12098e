import csv
import json
import subprocess
import sys

import pytest

from hopfbeb.cli import main
from hopfbeb.model import builtin, serialize_model


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_ex2(capsys):
    code, out, _ = run(capsys, "classify", "--builtin", "ex2", "--mu", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["alpha"] == -0.18
    assert rep["hypotheses"]["gamma_sign_ok"] is False


def test_cycles_ex2(capsys):
    code, out, _ = run(capsys, "cycles", "--builtin", "ex2", "--mu", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["stabilities"] == ["stable", "unstable", "stable"]
    assert len(rep["cycles"]) == 3
    for c in rep["cycles"]:
        assert max(abs(r) for r in c["certificate"]["residuals"]) < 1e-9


def test_pseudo_ex3(capsys):
    code, out, _ = run(capsys, "pseudo", "--builtin", "ex3", "--mu", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["Q"] == pytest.approx(0.0384, rel=1e-12)
    assert rep["admissible_count"] == 2
    assert rep["case"] == "two_per_mu"


def test_lambda_l_option(capsys):
    code, out, _ = run(capsys, "classify", "--builtin", "ex1", "--lambda-l", "0.9")
    assert code == 0
    assert json.loads(out)["prediction"] == "unstable_cycle_for_mu_neg"
    code, _, err = run(capsys, "classify", "--builtin", "ex2", "--lambda-l", "0.9")
    assert code == 1 and "ex1 only" in err


def test_usage_errors_exit_1(capsys, tmp_path):
    assert run(capsys, "classify")[0] == 1
    assert run(capsys, "classify", "--builtin", "ex1", "--tol", "-1")[0] == 1
    assert run(capsys, "map", "--builtin", "ex1", "--q-min", "3", "--q-max", "1")[0] == 1
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "classify", str(bad))[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_analysis_error_exit_2(capsys, tmp_path):
    s = builtin("ex1")
    doc = json.loads(serialize_model(s))
    doc["right"] = {"a1": 1, "a2": 1, "a3": 0, "b1": 1, "b2": 0, "b3": 0}  # real eigenvalues
    path = tmp_path / "real.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "cycles", str(path))
    assert code == 2 and "real eigenvalues" in err
    assert run(capsys, "cycles", "--builtin", "ex1", "--mu", "0")[0] == 2


def test_model_file_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "builtin", "--builtin", "ex2", "--mu", "1/3")
    assert code == 0
    path = tmp_path / "ex2.json"
    path.write_text(out)
    code, a, _ = run(capsys, "classify", str(path))
    code2, b, _ = run(capsys, "classify", "--builtin", "ex2", "--mu", "1/3")
    assert code == code2 == 0 and a == b


def test_json_numbers_round_trip(capsys):
    code, out, _ = run(capsys, "cycles", "--builtin", "ex1", "--mu", "1")
    rep = json.loads(out)
    assert json.loads(json.dumps(rep)) == rep
    cert = rep["cycles"][0]["certificate"]
    from hopfbeb.limit_cycles import certify_cycle, find_fixed_points

    s = builtin("ex1", mu=1)
    direct = certify_cycle(s, find_fixed_points(s)[0].y)
    assert cert["t_R"] == direct.t_R and cert["y_L"] == direct.y_L


@pytest.mark.parametrize("argv", [
    ["map", "--builtin", "ex1", "--format", "csv"],
    ["cycles", "--builtin", "ex2", "--format", "csv", "--q-points", "128"],
    ["simulate", "--builtin", "ex3", "--mu", "-1", "--x0", "0.5", "--y0", "-1", "--format", "csv"],
    ["pseudo", "--builtin", "ex3", "--format", "csv"],
])
def test_output_is_deterministic(capsys, argv):
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and a


def test_csv_floats_round_trip(capsys):
    _, out, _ = run(capsys, "map", "--builtin", "ex1", "--format", "csv", "--q-points", "5")
    rows = list(csv.DictReader(out.splitlines()))
    assert list(rows[0]) == ["q", "P_R", "T_R", "P", "dP_dq", "h"]
    from hopfbeb.halfmaps import composed_map

    for r in rows:
        assert float(r["P"]) == composed_map(builtin("ex1"), float(r["q"])).p


def test_portrait_ex2_has_three_closed_orbits(capsys, tmp_path):
    code, out, _ = run(capsys, "portrait", "--builtin", "ex2", "--mu", "1", "--out", str(tmp_path))
    assert code == 0
    manifest = json.loads((tmp_path / "ex2_mu1_manifest.json").read_text())
    closed = [f for f in manifest["files"] if f["kind"] == "closed_orbit"]
    assert len(closed) == 3
    for f in closed:
        rows = list(csv.DictReader((tmp_path / f["file"]).read_text().splitlines()))
        first, last = rows[0], rows[-1]
        assert abs(float(first["y"]) - float(last["y"])) < 1e-7
        assert abs(float(last["x"])) < 1e-9
    assert (tmp_path / "ex2_mu1_0.csv").exists()


def test_portrait_ex1_three_panels(capsys, tmp_path):
    kinds = {}
    for mu in ("-1", "0", "1"):
        assert run(capsys, "portrait", "--builtin", "ex1", "--mu", mu, "--out", str(tmp_path))[0] == 0
        manifest = json.loads((tmp_path / f"ex1_mu{mu}_manifest.json").read_text())
        kinds[mu] = [f["kind"] for f in manifest["files"]]
    assert "sliding_attracting" in kinds["-1"] and "closed_orbit" not in kinds["-1"]
    assert "sliding_repelling" in kinds["1"] and kinds["1"].count("closed_orbit") == 1
    assert not any(k.startswith("sliding") for k in kinds["0"])
    assert not (tmp_path / "ex1_mu0_sliding.csv").exists()
    assert (tmp_path / "ex1_mu-1_sliding.csv").exists()


def test_portrait_mu_zero_spirals(capsys, tmp_path):
    run(capsys, "portrait", "--builtin", "ex1", "--mu", "0", "--out", str(tmp_path))
    manifest = json.loads((tmp_path / "ex1_mu0_manifest.json").read_text())
    for f in manifest["files"]:
        rows = list(csv.DictReader((tmp_path / f["file"]).read_text().splitlines()))
        xs = [float(r["x"]) for r in rows]
        assert min(xs) < 0 < max(xs)  # orbits wind around the origin through both halves


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hopfbeb.cli", "pseudo", "--builtin", "ex1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["case"] == "none_all_mu"
    proc = subprocess.run([sys.executable, "-m", "hopfbeb.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1
