from causalicm.cli import main
from causalicm.csvio import read_table, write_rows
import json
import numpy as np
from numpy.testing import assert_allclose
import os
import pytest


def simulate_into(out, seed=7, *extra):
    return main(["simulate", "--scenario", "uni1", "--seed", str(seed), "--pool-size", "400",
                 "--n-obs", "150", "--out", out] + list(extra))


@pytest.fixture
def study_dir(tmp_path):
    out = str(tmp_path / "d")
    assert simulate_into(out) == 0
    write_rows(os.path.join(out, "test.csv"), ["x1"],
               [[repr(float(x))] for x in np.linspace(-2, 2, 7)])
    return out


def paths(study_dir, *names):
    return [os.path.join(study_dir, name) for name in names]


def test_simulate_writes_files(study_dir):
    for name in ("rct.csv", "obs.csv", "truth.json"):
        assert os.path.isfile(os.path.join(study_dir, name))
    with open(os.path.join(study_dir, "truth.json")) as f:
        truth = json.load(f)
    assert truth["seed"] == 7 and truth["tau"] == "1 + x1"


def test_simulate_is_byte_identical(tmp_path, study_dir):
    again = str(tmp_path / "again")
    assert simulate_into(again) == 0
    for name in ("rct.csv", "obs.csv"):
        with open(os.path.join(study_dir, name), "rb") as a, \
                open(os.path.join(again, name), "rb") as b:
            assert a.read() == b.read()


def test_unknown_scenario_is_a_usage_error(tmp_path):
    assert main(["simulate", "--scenario", "bogus", "--out", str(tmp_path)]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert simulate_into(str(blocker / "sub")) == 2


def test_rho_zero_round_trip_matches_trial_only_tlearner(study_dir):
    rct, obs, test = paths(study_dir, "rct.csv", "obs.csv", "test.csv")
    gp_out, icm_out = paths(study_dir, "gp.csv", "icm.csv")
    assert main(["fit-predict", rct, obs, test, "--method", "gp_exp", "--restarts", "1",
                 "--out", gp_out]) == 0
    report = os.path.splitext(gp_out)[0] + "_report.json"
    assert main(["fit-predict", rct, obs, test, "--rho", "0", "--frozen", report,
                 "--out", icm_out]) == 0
    _, expected = read_table(gp_out)
    header, found = read_table(icm_out)
    assert header == ["x1", "tau_mean", "tau_var", "ci_low", "ci_high"]
    assert_allclose(found, expected, atol=1e-10)


def test_auto_rho_is_reported(study_dir):
    rct, obs, test = paths(study_dir, "rct.csv", "obs.csv", "test.csv")
    out, report = paths(study_dir, "preds.csv", "fit.json")
    assert main(["fit", rct, obs, test, "--auto-rho", "--grid", "0", "0.5", "1", "--folds", "3",
                 "--tuning-mode", "fast", "--restarts", "1", "--out", out,
                 "--report", report]) == 0
    with open(report) as f:
        blob = json.load(f)
    assert blob["rho"] in (0.0, 0.5, 1.0)
    assert blob["selection"]["chosen_rho"] == blob["rho"]
    assert set(blob["arms"]) == {"0", "1"}


def test_malformed_row_is_a_usage_error(study_dir, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,y,a\n0.1,1.0,1\n0.2,oops,0\n")
    obs, test = paths(study_dir, "obs.csv", "test.csv")
    assert main(["fit-predict", str(bad), obs, test, "--rho", "0.5"]) == 2


def test_missing_column_is_a_usage_error(study_dir, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,a\n0.1,1\n")
    obs, test = paths(study_dir, "obs.csv", "test.csv")
    assert main(["fit-predict", str(bad), obs, test, "--rho", "0.5"]) == 2


def test_empty_arm_is_a_data_shape_error(study_dir, tmp_path):
    treated_only = tmp_path / "rct.csv"
    treated_only.write_text("x1,y,a\n0.1,1.0,1\n0.2,2.0,1\n0.3,1.5,1\n")
    obs, test = paths(study_dir, "obs.csv", "test.csv")
    assert main(["fit-predict", str(treated_only), obs, test, "--rho", "0.5"]) == 3


def test_tune_rho_writes_selection(study_dir):
    rct, obs, out = paths(study_dir, "rct.csv", "obs.csv", "rho.json")
    assert main(["tune-rho", rct, obs, "--grid", "0", "1", "--folds", "2", "--tuning-mode",
                 "fast", "--restarts", "1", "--out", out]) == 0
    with open(out) as f:
        assert set(json.load(f)) == {"grid", "losses", "chosen_rho", "fold_assignments"}


def test_variance_bound_report(study_dir):
    rct, obs, test, out = paths(study_dir, "rct.csv", "obs.csv", "test.csv", "bound.csv")
    assert main(["variance-bound", rct, obs, test, "--rho", "0.7", "--restarts", "1",
                 "--out", out]) == 0
    header, table = read_table(out)
    assert header[-2:] == ["holds_lower", "holds_upper"]
    assert table.shape[0] == 14
    assert np.all(table[:, -2:] == 1)


def write_benchmark_config(tmp_path, **changes):
    blob = {"scenario": {"id": "uni1", "pool_size": 300, "n_obs": 120},
            "methods": ["gp_exp", "causal_icm"], "replications": 1, "grid_size": 6,
            "rho": 0.5, "restarts": 1}
    blob.update(changes)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(blob))
    return str(path)


def test_benchmark_smoke_is_deterministic(tmp_path):
    config = write_benchmark_config(tmp_path)
    first, second = str(tmp_path / "one"), str(tmp_path / "two")
    assert main(["benchmark", config, "--out", first, "--jobs", "1"]) == 0
    assert main(["benchmark", config, "--out", second, "--jobs", "2"]) == 0
    for name in ("results.csv", "summary.json", "coverage.csv", "extrapolation.csv"):
        assert os.path.isfile(os.path.join(first, name))
    assert timing_free(first) == timing_free(second)


def timing_free(out):
    with open(os.path.join(out, "results.csv")) as f:
        return [line for line in f.read().splitlines() if ",seconds," not in line]


def test_benchmark_unknown_method(tmp_path):
    config = write_benchmark_config(tmp_path, methods=["gp_exp", "lasso"])
    assert main(["benchmark", config, "--out", str(tmp_path / "out")]) == 2


def test_benchmark_invalid_field(tmp_path):
    config = write_benchmark_config(tmp_path, replications=0)
    assert main(["benchmark", config]) == 2


def test_methods_lists_estimators(capsys):
    assert main(["methods"]) == 0
    out = capsys.readouterr().out
    for name in ("causal_icm", "gp_exp", "gp_obs", "experimental_grounding"):
        assert name in out


def test_log_file_lands_in_output_dir(output_dir):
    assert main(["methods"]) == 0
    assert os.listdir(os.path.join(str(output_dir), "logs"))


@pytest.mark.parametrize("command", ["benchmark", "coverage", "runtime"])
def test_benchmark_unwritable_output(tmp_path, monkeypatch, command):
    def never(*args, **kwargs):
        raise AssertionError("ran before the output directory was checked")

    monkeypatch.setattr("causalicm.cli.run_benchmark", never)
    monkeypatch.setattr("causalicm.cli.runtime_bench", never)
    config = write_benchmark_config(tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main([command, config, "--out", str(blocker / "sub"), "--jobs", "1"]) == 2


def test_fit_predict_rejects_non_utf8_input(study_dir):
    rct, obs, test = paths(study_dir, "rct.csv", "obs.csv", "test.csv")
    bad = os.path.join(study_dir, "latin1.csv")
    with open(bad, "wb") as f:
        f.write(b"x1,a,y\n\xff\xfe,1,2\n")
    out = os.path.join(study_dir, "never.csv")
    assert main(["fit-predict", bad, obs, test, "--rho", "0.5", "--out", out]) == 2
    assert main(["tune-rho", rct, bad]) == 2
    assert not os.path.exists(out)
