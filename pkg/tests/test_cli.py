import json
from fractions import Fraction

import numpy as np
import pytest

from toric_limits.cli import run
from toric_limits.configurations import pentagon
from toric_limits.io import InputError, config_to_dict, parse_config, parse_number, parse_sequence, read_json

PENT = config_to_dict(pentagon())


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def call(capsys, argv):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    return {
        "config": write(tmp_path, "pent.json", PENT),
        "rho4": write(tmp_path, "rho4.json", {"lift": {"(0,0)": -1, "(1,0)": -1, "(1,1)": 0, "(1/2,3/2)": 0, "(0,1)": 0}}),
        "weight": write(tmp_path, "w.json", {"log_weight": [0, -1, 0, 0, 0]}),
        "dir": tmp_path,
    }


def test_parse_number_forms():
    assert parse_number(3, "x") == 3
    assert parse_number("3/4", "x").denominator == 4
    assert parse_number(0.5, "x") == 0.5
    for bad in ("abc", None, True, float("nan")):
        with pytest.raises(InputError):
            parse_number(bad, "x")


def test_config_errors_name_the_field():
    with pytest.raises(InputError, match="missing field 'dim'"):
        parse_config({"points": []})
    with pytest.raises(InputError, match=r"points\[1\]: missing field 'coord'"):
        parse_config({"dim": 1, "points": [{"label": "a", "coord": [0]}, {"label": "b"}]})
    with pytest.raises(InputError, match="mode"):
        parse_config({"dim": 1, "mode": "decimal", "points": []})


def test_json_error_reports_line(tmp_path):
    p = write(tmp_path, "bad.json", '{\n  "dim": 2,\n  "points": [\n}')
    with pytest.raises(InputError, match="line 4"):
        read_json(p)


def test_sequence_unknown_label():
    with pytest.raises(InputError, match="unknown label"):
        parse_sequence({"mode": "structured", "terms": {"(9,9)": "i"}}, pentagon())
    with pytest.raises(InputError, match="mode"):
        parse_sequence({"mode": "fuzzy"}, pentagon())


def test_subdivide(files, capsys):
    code, out, _ = call(capsys, ["subdivide", "--config", files["config"], "--lift", files["rho4"],
                                 "--gauge", "(1,1);(1/2,3/2);(0,1)"])
    assert code == 0
    rep = json.loads(out)
    assert len(rep["subdivision"]["facets"]) == 2
    assert sorted(map(sorted, rep["nonfaces"]["pairs"])) == [["(0,0)", "(1/2,3/2)"], ["(1,0)", "(1/2,3/2)"]]
    assert rep["secondary_cone"]["dim"] == 4


def test_gauge_with_commas(files, capsys):
    code, out, _ = call(capsys, ["subdivide", "--config", files["config"], "--lift", files["rho4"],
                                 "--gauge", "(1,1),(1/2,3/2),(0,1)"])
    assert code == 0
    red = json.loads(out)["lift_reduced"]
    assert red["(1,1)"] == red["(1/2,3/2)"] == red["(0,1)"] == 0


def test_certify(files, capsys):
    code, out, _ = call(capsys, ["certify", "--config", files["config"], "--lift", files["rho4"]])
    assert code == 0
    certs = json.loads(out)["certificates"]
    assert len(certs) == 2 and all(c["valid"] for c in certs)


def test_sample_and_hausdorff(files, capsys, tmp_path):
    code, out, _ = call(capsys, ["sample", "--config", files["config"], "--weight", files["weight"], "--mesh", "0.25"])
    assert code == 0
    cloud = json.loads(out)
    assert cloud["newton_max"] <= 200
    p = write(tmp_path, "c.json", cloud)
    code, out, _ = call(capsys, ["hausdorff", "--cloud-a", p, "--cloud-b", p])
    assert code == 0 and json.loads(out)["d_H"] == 0


def test_degenerate_writes_artifacts(files, capsys):
    out_dir = files["dir"] / "run"
    code, out, _ = call(capsys, ["degenerate", "--config", files["config"], "--lift", files["rho4"],
                                 "--weight", files["weight"], "--t-max", "12", "--mesh", "0.1",
                                 "--out-dir", str(out_dir)])
    assert code == 0
    assert json.loads(out)["verdict"] == "converged"
    lines = (out_dir / "distances.csv").read_text().splitlines()
    assert lines[0] == "t,d_H,eta" and len(lines) == 8
    man = json.loads((out_dir / "manifest.json").read_text())
    assert man["exit_code"] == 0 and man["seed"] == 0
    assert set(man["inputs"]) == {"config", "lift", "weight"}
    assert len(man["inputs"]["config"]["sha256"]) == 64
    assert (out_dir / "report.json").read_text() == out


def test_inconclusive_exit_code(files, capsys):
    code, out, _ = call(capsys, ["degenerate", "--config", files["config"], "--lift", files["rho4"],
                                 "--weight", files["weight"], "--t-max", "0.1", "--t-step", "0.05",
                                 "--tol", "1e-4", "--mesh", "0.1"])
    assert code == 2 and json.loads(out)["verdict"] == "inconclusive"


def test_sequence_limit_command(files, capsys, tmp_path):
    seq = write(tmp_path, "s.json", {"mode": "structured", "terms": {"(0,0)": "-i-1/i", "(1,0)": "i-1", "(1,1)": "i",
                                                                     "(1/2,3/2)": "-i/2", "(0,1)": "-i"}})
    code, out, _ = call(capsys, ["sequence-limit", "--config", files["config"], "--sequence", seq, "--mesh", "0.1"])
    assert code == 0
    rep = json.loads(out)
    assert len(rep["equations"]["binomials"]) == 1


def test_input_errors_exit_1(files, capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"lift": {"(0,0)": "x"}})
    code, _, err = call(capsys, ["subdivide", "--config", files["config"], "--lift", bad])
    assert code == 1 and "lift" in err
    code, _, err = call(capsys, ["subdivide", "--config", str(tmp_path / "missing.json"), "--lift", files["rho4"]])
    assert code == 1 and "cannot read" in err
    code, _, _ = call(capsys, ["subdivide", "--config", files["config"]])
    assert code == 1
    code, _, _ = call(capsys, ["nonsense"])
    assert code == 1
    neg = write(tmp_path, "neg.json", {"weight": [1, -1, 1, 1, 1]})
    code, _, err = call(capsys, ["sample", "--config", files["config"], "--weight", neg])
    assert code == 1 and "not positive" in err


def test_repro_square_is_deterministic(capsys, tmp_path):
    code, a, _ = call(capsys, ["repro", "pentagon-square", "--mesh", "0.1"])
    code2, b, _ = call(capsys, ["repro", "pentagon-square", "--mesh", "0.1"])
    assert code == code2 == 0 and a == b
    rep = json.loads(a)
    assert rep["subdivision_matches"] and rep["weight_matches"]


def test_repro_fan(capsys):
    code, out, _ = call(capsys, ["repro", "pentagon-fan", "--samples", "1500", "--seed", "3"])
    assert code == 0
    rep = json.loads(out)
    assert rep["counts"] == {"minimal": 1, "rays": 5, "chambers": 5}
    # exact generators come back as ints or "p/q" strings
    gens = {tuple(Fraction(x) for x in r["generator"]) for r in rep["rays"].values()}
    assert (-1, -1) in gens and (-1, 0) in gens


def test_version(capsys):
    code, out, _ = call(capsys, ["--version"])
    assert code == 0 and "0.1.0" in out
