import csv
import io
import json
import math

import pytest

from hupconst.cli import CONFIG_ENV, RunConfig, build_parser, load_config, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return json.loads(text)["rows"]


def final_row(rows, prefix):
    return [r for r in rows if r["name"].startswith(prefix) and not r["name"].endswith("_mode")][-1]


def test_hydrogen_dim4(capsys):
    code, out, _ = run(["constants", "hydrogen", "--dim", "4"], capsys)
    assert code == 0
    row = final_row(rows_of(out), "hydrogen")
    assert row["value"] == pytest.approx(5.0, abs=1e-6)
    assert row["target"] == 5.0 and row["status"] == "pass"
    assert row["convergence"] == [] and row["detail"]["converged"]


def test_stability_dim2(capsys):
    code, out, _ = run(["constants", "stability", "--dim", "2"], capsys)
    assert code == 0
    rows = rows_of(out)
    row = final_row(rows, "stability")
    assert row["value"] == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-6)
    modes = [r for r in rows if r["name"].endswith("_mode")]
    assert [r["mode"] for r in modes] == [1, 2, 3, 4]
    assert all(r["status"] == "pass" and r["convergence"] for r in modes)


def test_hydrogen_dim2_interval(capsys):
    code, out, _ = run(["constants", "hydrogen", "--dim", "2"], capsys)
    assert code == 0
    row = final_row(rows_of(out), "hydrogen")
    lo, hi = row["target"]
    assert lo == pytest.approx((3 + 6 * math.sqrt(2)) / 7) and hi == pytest.approx(math.sqrt(3))
    assert lo <= row["value"] <= hi
    assert row["target_kind"] == "interval"
    assert 0 < row["detail"]["position_in_bracket"] < 1
    assert row["detail"]["sharpened_width"] < 1e-6


@pytest.mark.parametrize("suite", ["extremal", "hardy", "linearize", "radial-identity",
                                   pytest.param("lemma21", id="radial-identity-alias")])
def test_verify_suites_pass(suite, capsys):
    code, out, err = run(["verify", suite], capsys)
    assert code == 0, err
    rows = rows_of(out)
    assert rows and all(r["status"] == "pass" for r in rows)


def test_verify_cone_sphere(capsys):
    code, out, _ = run(["verify", "lemma14", "--trials", "10000", "--seed", "7"], capsys)
    assert code == 0
    assert all(r["status"] == "pass" for r in rows_of(out))


def test_extremal_tolerances(capsys):
    _, out, _ = run(["verify", "extremal"], capsys)
    for r in rows_of(out):
        assert r["abs_err"] is None or r["abs_err"] <= r["tol"]
        assert r["tol"] <= 1e-7


def test_explore_dim4(capsys):
    code, out, _ = run(["explore", "hydrogen-stability", "--dim", "4"], capsys)
    assert code == 0
    row = final_row(rows_of(out), "hydrogen_stability")
    assert row["value"] > 0 and row["detail"]["exploratory"]
    assert row["target_kind"] == "none"


def test_explore_dim3_fails_but_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run(["explore", "hydrogen-stability", "--dim", "3", "--out", str(out)], capsys)
    assert code == 1
    rows = rows_of(out.read_text())
    assert rows[0]["status"] == "fail" and "N >= 4" in rows[0]["detail"]["error"]
    assert "FAIL" in err


def test_csv_output(capsys):
    code, out, _ = run(["constants", "stability", "--dim", "3", "--modes", "2", "--format", "csv"], capsys)
    assert code == 0
    table = list(csv.DictReader(io.StringIO(out)))
    assert table[-1]["name"].startswith("stability") and table[-1]["status"] == "pass"
    assert float(table[-1]["value"]) == pytest.approx(math.sqrt(17) - 3, abs=1e-6)
    json.loads(table[0]["convergence"])


def test_config_file_env_and_flag_precedence(tmp_path, monkeypatch):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"modes": 2, "seed": 5, "dims": [3]}))
    parser = build_parser()
    monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
    cfg = load_config(parser.parse_args(["constants", "stability"]))
    assert cfg.modes == 2 and cfg.seed == 5 and cfg.dims == [3]
    cfg = load_config(parser.parse_args(["constants", "stability", "--seed", "9", "--dim", "2,4"]))
    assert cfg.seed == 9 and cfg.dims == [2, 4] and cfg.modes == 2
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"modes": 3}))
    cfg = load_config(parser.parse_args(["constants", "stability", "--config", str(other)]))
    assert cfg.modes == 3 and cfg.seed == 0


def test_unknown_config_key_is_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"modez": 2}))
    with pytest.raises(SystemExit):
        main(["verify", "linearize", "--config", str(bad)])


def test_config_echo_excludes_output_path(tmp_path, capsys):
    out = tmp_path / "x.json"
    main(["verify", "linearize", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert "out" not in doc["config_echo"] and doc["config_echo"]["seed"] == 0
    assert set(doc) == {"tool_version", "config_echo", "rows"}


def test_same_config_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "stability-sample", "--trials", "20", "--seed", "3", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(format="xml")
    with pytest.raises(ValueError):
        RunConfig(modes=0)
