from causalicm.cate import (CateEstimate, _least_squares, arm_blocks, check_level,
                            fit_causal_icm_cate, fit_experimental_grounding, fit_tlearner_gp,
                            frozen_from_report, ipw_pseudo_outcome, pool_datasets,
                            predict_cate, split_arms, z_value)
from causalicm.errors import DataShapeError, NumericalError, ValidationError
from causalicm.gp import Standardizer
from causalicm.simgen import (Dataset, GroundTruth, SimScenario, check_confounding_sign,
                              simulate)
from helpers import frozen_hyperparameters, toy_dataset
import numpy as np
from numpy.testing import assert_allclose
import pytest
from scipy.stats import norm

X_TEST = np.linspace(-2, 2, 9).reshape(-1, 1)


def test_credible_interval_from_normal_quantile():
    estimate = CateEstimate([1.0, 2.0], [4.0, 0.0], 0.95)
    assert z_value(0.95) == pytest.approx(1.959963985, rel=1e-9)
    assert estimate.ci_low[0] == pytest.approx(1.0 - 2 * 1.959963985)
    assert estimate.ci_high[1] == estimate.ci_low[1] == 2.0
    posteriors = list(estimate)
    assert len(posteriors) == len(estimate) == 2
    assert posteriors[0].level == 0.95
    assert posteriors[1] == estimate[1]


@pytest.mark.parametrize("level", [0.0, 1.0, 1.5])
def test_invalid_level(level):
    with pytest.raises(ValidationError):
        check_level(level)


def test_empty_arm_names_the_cell():
    data = Dataset(np.zeros((3, 1)), np.zeros(3), [0, 0, 0], "E")
    with pytest.raises(DataShapeError) as info:
        split_arms(data)
    assert "(study E, arm 1)" in info.value.message


def test_empty_observational_arm_is_a_data_shape_error():
    obs = Dataset(np.zeros((4, 1)), np.zeros(4), [1, 1, 1, 1], "O")
    with pytest.raises(DataShapeError):
        fit_causal_icm_cate(toy_dataset("E"), obs, rho=0.5)


def test_arm_blocks_center_and_standardize():
    rct, obs = toy_dataset("E", seed=1), toy_dataset("O", seed=2)
    arms, std, offsets = arm_blocks(rct, obs)
    pooled_y = np.concatenate([arms[1][0][1], arms[1][1][1]])
    assert np.mean(pooled_y) == pytest.approx(0.0, abs=1e-12)
    pooled_X = np.vstack([arms[a][s][0] for a in (0, 1) for s in (0, 1)])
    assert_allclose(pooled_X.mean(axis=0), 0.0, atol=1e-12)
    assert set(offsets) == {0, 1}


def test_rho_zero_matches_trial_only_tlearner():
    rct, obs = toy_dataset("E", seed=3), toy_dataset("O", seed=4, shift=2.0)
    hyper = frozen_hyperparameters()
    baseline = fit_tlearner_gp(rct, hyperparameters=hyper)
    model = fit_causal_icm_cate(rct, obs, rho=0.0, standardizer=baseline.standardizer,
                                offsets=baseline.offsets, hyperparameters=hyper)
    expected, found = baseline.predict(X_TEST), predict_cate(model, X_TEST)
    assert_allclose(found.mean, expected.mean, atol=1e-10)
    assert_allclose(found.variance, expected.variance, atol=1e-10)


def test_rho_one_matches_pooled_tlearner():
    rct, obs = toy_dataset("E", seed=5), toy_dataset("O", seed=6, shift=1.0)
    hyper = frozen_hyperparameters()
    pooled = fit_tlearner_gp(pool_datasets(rct, obs), hyperparameters=hyper,
                             standardizer=Standardizer.from_covariates(rct.X, obs.X))
    model = fit_causal_icm_cate(rct, obs, rho=1.0, standardizer=pooled.standardizer,
                                offsets=pooled.offsets, hyperparameters=hyper)
    assert_allclose(model.predict(X_TEST).mean, pooled.predict(X_TEST).mean, atol=1e-6)
    assert_allclose(model.predict(X_TEST).variance, pooled.predict(X_TEST).variance, atol=1e-6)


def test_cate_variance_adds_arm_variances():
    rct, obs = toy_dataset("E", seed=7), toy_dataset("O", seed=8)
    model = fit_causal_icm_cate(rct, obs, rho=0.5, hyperparameters=frozen_hyperparameters())
    Z = model.standardizer.transform(X_TEST)
    _, v1 = model.icm_arm1.posterior(Z, "FE")
    _, v0 = model.icm_arm0.posterior(Z, "FE")
    assert_allclose(model.predict(X_TEST).variance, v0 + v1)


def test_fit_report_round_trip(small_uni1):
    rct, obs, _ = small_uni1
    model = fit_causal_icm_cate(rct, obs, rho=0.3, restarts=1)
    report = model.report()
    assert report["rho"] == 0.3
    assert report["selection"] is None
    for arm in ("0", "1"):
        assert report["arms"][arm]["lml"] >= report["arms"][arm]["initial_lml"]
    standardizer, offsets, hyper = frozen_from_report(report)
    refit = fit_causal_icm_cate(rct, obs, rho=0.3, standardizer=standardizer, offsets=offsets,
                                hyperparameters=hyper)
    assert_allclose(refit.predict(X_TEST).mean, model.predict(X_TEST).mean, atol=1e-9)
    with pytest.raises(ValidationError):
        frozen_from_report({"rho": 0.3})


def test_auto_rho_records_selection(small_uni1):
    rct, obs, _ = small_uni1
    model = fit_causal_icm_cate(rct, obs, rho="auto", grid=[0.0, 0.5, 1.0], folds=3,
                                tuning_mode="fast", restarts=1)
    assert model.rho in (0.0, 0.5, 1.0)
    assert model.selection.chosen_rho == model.rho
    assert model.report()["selection"]["chosen_rho"] == model.rho


def test_ipw_pseudo_outcome():
    assert_allclose(ipw_pseudo_outcome([2.0, 2.0], [1, 0], 0.5), [4.0, -4.0])
    with pytest.raises(ValidationError):
        ipw_pseudo_outcome([1.0], [1], 1.0)


def test_least_squares_falls_back_to_ridge():
    design = np.column_stack([np.ones(5), np.arange(5.0), np.arange(5.0)])
    theta, covariance = _least_squares(design, np.arange(5.0))
    assert np.all(np.isfinite(theta))
    assert_allclose(design.dot(theta), np.arange(5.0), atol=1e-4)
    assert covariance.shape == (3, 3)


def test_experimental_grounding_fits_and_predicts(small_uni1):
    rct, obs, truth = small_uni1
    model = fit_experimental_grounding(rct, obs, restarts=1)
    estimate = model.predict(X_TEST)
    assert model.theta.shape == (2,)
    assert np.all(np.isfinite(estimate.mean))
    assert np.all(estimate.variance > 0)
    assert model.report()["method"] == "experimental_grounding"


def test_tlearner_predicts_trial_effect(small_uni1):
    rct, _, truth = small_uni1
    model = fit_tlearner_gp(rct, restarts=1)
    inside = np.linspace(-1.8, -1.2, 4).reshape(-1, 1)
    assert np.max(np.abs(model.predict(inside).mean - truth.tau(inside))) < 1.0


def test_interval_width_follows_normal_quantiles():
    rct = toy_dataset("E", seed=7)
    model = fit_tlearner_gp(rct, hyperparameters=frozen_hyperparameters())
    narrow, wide = model.predict(X_TEST, 0.8), model.predict(X_TEST, 0.9)
    ratio = (narrow.ci_high - narrow.ci_low) / (wide.ci_high - wide.ci_low)
    assert_allclose(ratio, norm.ppf(0.9) / norm.ppf(0.95), rtol=1e-10)
    assert_allclose(narrow.mean, wide.mean)


def test_observational_tlearner_absorbs_confounding():
    scenario = SimScenario("uni1", pool_size=300, n_obs=300)
    grid = np.linspace(-1.5, 1.5, 7).reshape(-1, 1)
    sign = check_confounding_sign(scenario, seed=0, n_obs=20000).sign
    truth = GroundTruth(scenario)
    errors = []
    for seed in range(5):
        _, obs, _ = simulate(scenario, seed)
        estimate = fit_tlearner_gp(obs, seed=seed, restarts=1).predict(grid)
        errors.append(estimate.mean - truth.tau(grid))
    bias = np.mean(errors, axis=0)
    assert np.max(np.abs(bias + sign * truth.eta(grid))) < 0.5


def test_grounding_bias_is_null_without_confounding():
    rct = toy_dataset("E", n_per_arm=150, seed=8)
    obs = toy_dataset("O", n_per_arm=100, seed=9)
    model = fit_experimental_grounding(rct, obs, restarts=1)
    errors = np.sqrt(np.diag(model.theta_covariance))
    assert np.all(np.abs(model.theta) < 3 * errors + 1e-3)


def test_least_squares_singular_even_with_ridge(monkeypatch):
    def singular(matrix):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(np.linalg, "inv", singular)
    with pytest.raises(NumericalError):
        _least_squares(np.ones((4, 2)), np.zeros(4))
