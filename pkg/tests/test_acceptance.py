"""Monte Carlo checks of the estimator's statistical behaviour. Run with `pytest -m slow`."""

from causalicm.gp import gp_fit, gp_posterior
from causalicm.harness import BenchmarkConfig, run_benchmark
from causalicm.icm import (TASKS, coregionalization_matrix, icm_fit, icm_posterior,
                           icm_predict, variance_bound_report)
from causalicm.simgen import (GroundTruth, SimScenario, check_confounding_sign,
                              estimate_arm_contrast, simulate)
from helpers import dense_oracle, random_blocks, random_kernel
import numpy as np
from numpy.testing import assert_allclose
import os
import pytest

pytestmark = pytest.mark.slow

JOBS = os.cpu_count() or 1
ALL_METHODS = ["causal_icm", "gp_exp", "gp_obs", "experimental_grounding"]


def benchmark(scenario, **fields):
    # One hyperparameter fit per arm, reused across folds and grid values
    fields.setdefault("tuning_mode", "fast")
    return run_benchmark(BenchmarkConfig(scenario, **fields), jobs=JOBS)


def methods_summary(result, variant="base"):
    summary = result.summary()["variants"][variant]["methods"]
    for entry in summary.values():
        assert entry["lml_violations"] == 0
        assert entry["successes"] + entry["failures"] == result.config.replications
    return summary


def test_oracle_equivalence():
    rng = np.random.default_rng(1)
    for _ in range(200):
        dim = rng.integers(1, 4)
        De, Do = random_blocks(rng, dim, rng.integers(1, 11), rng.integers(0, 21))
        rho, noise = rng.uniform(0, 1), rng.uniform(0.01, 1.0)
        kernel = random_kernel(rng, dim)
        x_star = rng.uniform(-2, 2, size=dim)
        model = icm_fit(De, Do, rho, kernel, noise)
        expected = dense_oracle(De, Do, rho, kernel, noise, x_star)
        for task in TASKS:
            posterior = icm_posterior(model, x_star, task)
            assert abs(posterior.mean - expected[task][0]) < 1e-8
            assert abs(posterior.variance - expected[task][1]) < 1e-8


def test_variance_sandwich_never_violated():
    rng = np.random.default_rng(2)
    violations = 0
    for _ in range(1000):
        dim = rng.integers(1, 4)
        De, Do = random_blocks(rng, dim, rng.integers(1, 15), rng.integers(1, 30))
        report = variance_bound_report(De, Do, rng.uniform(0, 1), random_kernel(rng, dim),
                                       rng.uniform(0.01, 1.0), rng.uniform(-3, 3, (5, dim)))
        violations += sum(1 for b in report if not (b.holds_lower and b.holds_upper))
    assert violations == 0


def test_limit_reductions():
    rng = np.random.default_rng(3)
    for _ in range(50):
        dim = rng.integers(1, 3)
        De, Do = random_blocks(rng, dim, rng.integers(1, 12), rng.integers(1, 20))
        kernel, noise = random_kernel(rng, dim), rng.uniform(0.05, 1.0)
        X_star = rng.uniform(-2, 2, size=(4, dim))
        trial = gp_posterior(gp_fit(De[0], De[1], kernel, noise), X_star)
        assert_allclose(icm_predict(icm_fit(De, Do, 0.0, kernel, noise), X_star, "FE"), trial,
                        atol=1e-10)
        pooled = gp_posterior(gp_fit(np.vstack([De[0], Do[0]]), np.concatenate([De[1], Do[1]]),
                                     kernel, noise), X_star)
        assert_allclose(icm_predict(icm_fit(De, Do, 1.0, kernel, noise), X_star, "FE"), pooled,
                        atol=1e-6)
        prior = icm_fit(None, None, 1.0, kernel, noise)
        assert icm_posterior(prior, X_star[0], "ETA").variance == pytest.approx(0.0, abs=1e-12)
    assert coregionalization_matrix(1.0).determinant == 0.0


def test_rho_sensitivity_trend():
    grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    result = benchmark("uni2", methods=["causal_icm"], replications=20,
                       sweeps={"rho_grid": grid})
    means = [methods_summary(result, "rho={0:g}".format(r))["causal_icm"]["mean_rmse"]
             for r in grid]
    assert all(a > b for a, b in zip(means[:5], means[1:5]))
    assert means[5] > means[4]
    assert means[4] < 0.7


@pytest.mark.parametrize("scenario", ["uni1", "uni2"])
def test_method_comparison(scenario):
    result = benchmark(scenario, methods=ALL_METHODS, replications=20)
    summary = methods_summary(result)
    icm = summary["causal_icm"]["mean_rmse"]
    assert icm <= summary["gp_exp"]["mean_rmse"]
    assert icm <= summary["gp_obs"]["mean_rmse"]
    if scenario == "uni2":
        assert icm <= summary["experimental_grounding"]["mean_rmse"]


def test_conditional_coverage():
    result = benchmark("uni1", methods=["causal_icm", "gp_obs"],
                       replications=50, grid_size=50)
    methods_summary(result)
    assert np.mean(result.coverage("base", "causal_icm")) >= 0.90
    eta = np.abs(GroundTruth(SimScenario("uni1")).eta(result.X_grid))
    worst = eta >= np.median(eta)
    assert np.mean(result.coverage("base", "gp_obs")[worst]) <= 0.50


def test_support_split():
    result = benchmark("uni2", methods=["causal_icm", "experimental_grounding"],
                       replications=20)
    summary = methods_summary(result)
    assert summary["causal_icm"]["out_mse"] < summary["experimental_grounding"]["out_mse"]
    assert summary["causal_icm"]["in_mse"] < 0.6


def test_kernel_sweep():
    families = ["rbf", "matern52", "matern32"]
    result = benchmark("uni2", methods=["causal_icm"], replications=20,
                       sweeps={"kernel_families": families})
    stats = {f: methods_summary(result, "kernel=" + f)["causal_icm"] for f in families}
    assert stats["rbf"]["mean_rmse"] <= stats["matern52"]["mean_rmse"]
    assert stats["rbf"]["mean_rmse"] <= stats["matern32"]["mean_rmse"]
    pooled_sd = np.sqrt(0.5 * (stats["matern52"]["sd_rmse"] ** 2 +
                               stats["matern32"]["sd_rmse"] ** 2))
    assert stats["matern52"]["mean_rmse"] <= stats["matern32"]["mean_rmse"] + pooled_sd


def test_sample_size_robustness():
    result = benchmark("uni2", methods=["causal_icm"], replications=10,
                       sweeps={"n_obs_list": [200, 1000, 2000]})
    small = methods_summary(result, "n_obs=200")["causal_icm"]["mean_rmse"]
    large = methods_summary(result, "n_obs=2000")["causal_icm"]["mean_rmse"]
    methods_summary(result, "n_obs=1000")
    assert large <= 1.25 * small


def test_data_generating_process():
    grid = np.linspace(-1.5, 1.5, 9).reshape(-1, 1)
    for scenario_id in ("uni1", "uni2"):
        scenario = SimScenario(scenario_id, pool_size=100000, n_obs=100000, selection_scale=0.0)
        rct, obs, truth = simulate(scenario, 11)
        assert np.max(np.abs(estimate_arm_contrast(rct, grid) - truth.tau(grid))) < 0.1
        check = check_confounding_sign(scenario, seed=12, X_grid=grid)
        assert check.error < 0.1
        expected = truth.tau(grid) - check.sign * truth.eta(grid)
        assert np.max(np.abs(estimate_arm_contrast(obs, grid) - expected)) < 0.1
    sizes = [simulate(SimScenario("uni1"), seed)[0].n for seed in range(200)]
    assert np.mean([200 <= n <= 300 for n in sizes]) >= 0.9
