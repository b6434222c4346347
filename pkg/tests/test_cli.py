import json

import pytest

from lahwalk import cli


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_dist_pmf_rows(capsys):
    code, out, _ = run(["dist", "pmf", "--n", "4", "--k", "2", "--format", "csv"], capsys)
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "j,pmf_pq,pmf_float"
    assert [tuple(r.split(",")[:2]) for r in body[1:]] == [("2", "11/36"), ("3", "1/2"), ("4", "7/36")]


def test_csv_header_echoes_config(capsys):
    _, out, _ = run(["dist", "cdf", "--n", "5", "--k", "2", "--format", "csv"], capsys)
    header = [line for line in out.splitlines() if line.startswith("#")]
    assert "# command=dist" in header and "# n=5" in header and "# what=cdf" in header


def test_thresholds_json(capsys):
    code, out, _ = run(["asy", "thresholds", "--delta", "0.5", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"config", "results", "provenance"}
    row = doc["results"]["rows"][0]
    assert row["rho_weak"] == pytest.approx(0.5693, abs=5e-4)
    assert row["rho_strong"] == pytest.approx(0.1498, abs=5e-4)
    assert doc["provenance"]["seed"] == 0


def test_json_keeps_rationals_exact(capsys):
    _, out, _ = run(["dist", "moments", "--n", "4", "--k", "2", "--format", "json"], capsys)
    rows = {r["quantity"]: r for r in json.loads(out)["results"]["rows"]}
    assert rows["mean"]["value_pq"] == "26/9"
    assert rows["variance"]["value_pq"] == "79/162"


def test_unknown_flag_exit_2_without_output(capsys):
    code, out, err = run(["dist", "pmf", "--n", "4", "--k", "2", "--bogus"], capsys)
    assert code == 2 and out == "" and "bogus" in err


def test_domain_error_exit_2(capsys):
    code, out, err = run(["dist", "pmf", "--n", "2", "--k", "5"], capsys)
    assert code == 2 and out == "" and "k" in err


def test_resource_error_exit_2(capsys):
    code, out, _ = run(["exact", "stirling1", "--n", "9000", "--k", "3"], capsys)
    assert code == 2 and out == ""


def test_numerical_error_exit_3(capsys, monkeypatch):
    from lahwalk import hullmodel
    from lahwalk.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("no bracket")

    monkeypatch.setattr(hullmodel, "threshold_curve", boom)
    code, out, err = run(["asy", "thresholds", "--delta", "0.5"], capsys)
    assert code == 3 and out == "" and "no bracket" in err


def test_exact_commands(capsys):
    _, out, _ = run(["exact", "stirling1", "--n", "6", "--k", "3", "--format", "csv"], capsys)
    assert out.splitlines()[-1] == "6,3,225"
    _, out, _ = run(["exact", "harmonic", "--n", "10", "--format", "csv"], capsys)
    assert "7381/2520" in out.splitlines()[-1]
    _, out, _ = run(["exact", "lah", "--n", "4", "--k", "2", "--format", "csv"], capsys)
    assert out.splitlines()[-1] == "4,2,36"


def test_faces_and_sample(capsys):
    _, out, _ = run(["faces", "expected", "--n", "5", "--d", "3", "--k", "1", "--format", "csv"], capsys)
    assert out.splitlines()[-1].startswith("5,3,1,23/4,5.75,")
    code, out, _ = run(["sample", "--n", "12", "--k", "3", "--trials", "2000", "--seed", "3", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["results"]["rows"][0]["count"] == 2000


def test_output_is_byte_identical(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    argv = ["simulate", "--d", "2", "--n", "8", "--trials", "200", "--seed", "5", "--format", "json"]
    assert cli.run(argv + ["--output", "a.json"]) == 0
    assert cli.run(argv + ["--output", "b.json", "--threads", "2"]) == 0
    a, b = (tmp_path / "a.json").read_bytes(), (tmp_path / "b.json").read_bytes()
    assert a == b
    assert capsys.readouterr().out == ""


def test_config_file_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn = 4\nk = 2\nformat = csv\n")
    code, out, _ = run(["dist", "pmf", "--config", str(cfg)], capsys)
    assert code == 0 and "# n=4" in out
    code, out, _ = run(["dist", "pmf", "--config", str(cfg), "--n", "5"], capsys)
    assert code == 0 and "# n=5" in out
    cfg.write_text("nope = 1\n")
    code, out, _ = run(["dist", "pmf", "--n", "4", "--k", "2", "--config", str(cfg)], capsys)
    assert code == 2 and out == ""


def test_verify_subset(capsys):
    code, out, _ = run(["verify", "--only", "3", "--only", "9", "--format", "csv"], capsys)
    assert code == 0
    rows = [r for r in out.splitlines() if not r.startswith("#")][1:]
    assert [r.split(",")[2] for r in rows] == ["PASS", "PASS"]
