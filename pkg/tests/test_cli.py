import csv
import io
import json

import pytest

from d2dcache.cli import main, parse_grid
from d2dcache.coverage import MobilityQuery, asymptotic_estimate
from d2dcache.distributions import NetworkParams
from d2dcache.results import FIELDS, render

HEADER = "method,v,T_db,p_a,q,alpha,lambda,estimate,err,ci_low,ci_high,n_trials,seed"


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_header_schema():
    assert ",".join(FIELDS) == HEADER
    text = render([asymptotic_estimate(NetworkParams(), MobilityQuery(1.0, 1.0))])
    assert text.splitlines()[0] == HEADER


def test_json_mirrors_fields():
    est = asymptotic_estimate(NetworkParams(), MobilityQuery(float("inf"), 1.0))
    data = json.loads(render([est], "json"))
    assert list(data[0]) == list(FIELDS)
    assert data[0]["v"] is None


@pytest.mark.parametrize("text, expected", [
    ("0:1:0.25", [0.0, 0.25, 0.5, 0.75, 1.0]),
    ("-10:10:5", [-10.0, -5.0, 0.0, 5.0, 10.0]),
    ("1,2.5", [1.0, 2.5]),
    ("3", [3.0]),
])
def test_parse_grid(text, expected):
    assert parse_grid(text) == expected


def test_coverage_both(tmp_path):
    code, text = run(tmp_path, "coverage", "--pa", "0.5", "--q", "0.5", "--alpha", "4",
                     "--lambda", "1", "--t-db", "0", "--v", "1", "--method", "both",
                     "--trials", "500", "--workers", "1")
    assert code == 0
    r = rows(text)
    assert [x["method"] for x in r] == ["analytic", "montecarlo"]
    assert r[1]["n_trials"] == "500" and r[1]["ci_low"] != ""


def test_coverage_default_params(tmp_path):
    code, text = run(tmp_path, "coverage", "--t-db", "0", "--v", "0", "--method", "analytic")
    assert code == 0
    (row,) = rows(text)
    assert 0.0 <= float(row["estimate"]) <= 1.0
    assert float(row["estimate"]) == pytest.approx(0.2002, abs=1e-4)


def test_missing_flag(tmp_path, capsys):
    code, _ = run(tmp_path, "coverage", "--v", "1")
    assert code == 2
    assert "t_db" in capsys.readouterr().err


def test_bad_value_names_field(tmp_path, capsys):
    code, _ = run(tmp_path, "coverage", "--v", "1", "--t-db", "0", "--q", "2")
    assert code == 2
    assert "q must" in capsys.readouterr().err


def test_unknown_method_is_usage_error(tmp_path):
    code, _ = run(tmp_path, "coverage", "--v", "1", "--t-db", "0", "--method", "exact")
    assert code == 2


def test_v_sweep(tmp_path):
    code, text = run(tmp_path, "sweep", "--v-grid", "0:5:0.25", "--t-db", "0")
    assert code == 0
    r = rows(text)
    analytic = [x for x in r if x["method"] == "analytic"]
    reference = [x for x in r if x["method"] == "asymptotic"]
    assert len(analytic) == 21 and len(reference) == 21
    vals = [float(x["estimate"]) for x in analytic]
    errs = [float(x["err"]) for x in analytic]
    assert all(b >= a - 2 * (ea + eb) for a, b, ea, eb in zip(vals, vals[1:], errs, errs[1:]))
    assert [float(x["v"]) for x in analytic] == [0.25 * i for i in range(21)]
    assert len({x["estimate"] for x in reference}) == 1


def test_t_sweep(tmp_path):
    code, text = run(tmp_path, "sweep", "--t-db-grid=-10:10:2", "--v", "0")
    assert code == 0
    r = rows(text)
    assert len(r) == 11 and {x["method"] for x in r} == {"analytic"}
    vals = [float(x["estimate"]) for x in r]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_single_point_sweep(tmp_path):
    code, text = run(tmp_path, "sweep", "--t-db-grid", "3", "--v", "1")
    assert code == 0 and len(rows(text)) == 1


def test_two_grids_rejected(tmp_path):
    code, _ = run(tmp_path, "sweep", "--v-grid", "0,1", "--t-db-grid", "0,1")
    assert code == 2


def test_asymptotic_command(tmp_path):
    code, text = run(tmp_path, "asymptotic", "--t-db", "0")
    assert code == 0
    (row,) = rows(text)
    assert row["v"] == "inf"
    assert float(row["estimate"]) == pytest.approx(0.45911, abs=1e-5)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"pa": 0.3, "q": 0.2, "t_db": 5, "v": 2, "method": "asymptotic"}))
    code, text = run(tmp_path, "coverage", "--config", str(cfg), "--q", "0.4")
    assert code == 0
    (row,) = rows(text)
    assert (row["p_a"], row["q"], row["T_db"], row["v"]) == ("0.3", "0.4", "5.0", "2.0")


def test_config_unknown_field(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"density": 3}))
    code, _ = run(tmp_path, "coverage", "--config", str(cfg), "--v", "1", "--t-db", "0")
    assert code == 2
    assert "density" in capsys.readouterr().err


def test_numeric_failure_exit(tmp_path):
    # a window too small to hold both locations fails every Monte Carlo point
    code, text = run(tmp_path, "coverage", "--v", "4", "--t-db", "0", "--method", "both",
                     "--window-radius", "1", "--trials", "10")
    assert code == 1
    r = rows(text)
    assert r[0]["estimate"] != "" and r[1]["estimate"] == ""


def test_byte_identical_runs(tmp_path):
    args = ("coverage", "--v-grid", "0,1", "--t-db", "0", "--method", "montecarlo",
            "--trials", "300", "--seed", "9")
    _, a = run(tmp_path, *args, name="a.csv")
    _, b = run(tmp_path, *args, name="b.csv")
    _, c = run(tmp_path, *args[:-1], "10", name="c.csv")
    assert a == b and a != c


def test_json_output(tmp_path):
    code, text = run(tmp_path, "coverage", "--v", "1", "--t-db", "0", "--method", "asymptotic",
                     "--format", "json", name="out.json")
    assert code == 0
    assert json.loads(text)[0]["method"] == "asymptotic"


def test_validate_subset(capsys):
    code = main(["validate", "--quick", "--only", "2", "5", "7"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("[PASS]") == 3 and "smoke level" in out


def test_validate_tightened(capsys):
    code = main(["validate", "--only", "2", "--tol-scale", "0.01"])
    assert code == 0
    assert "[PASS] 2" in capsys.readouterr().out
