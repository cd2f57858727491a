# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""CATE estimators: the two-ICM T-learner and the in-repo comparators.

Every model exposes predict(X, level) returning a CateEstimate, so the harness and the
command line treat them the same way."""

from causalicm.errors import DataShapeError, NumericalError, ValidationError
from causalicm.gp import (DEFAULT_RESTARTS, Hyperparameters, Standardizer, as_matrix, gp_fit,
                          gp_posterior, log_marginal_likelihood, optimize_hyperparameters)
from causalicm.icm import icm_fit, icm_predict, optimize_icm
from causalicm.simgen import Dataset, TRIAL_TREATMENT_PROBABILITY
from causalicm.tuning import DEFAULT_FOLDS, DEFAULT_GRID, tune_rho_arms
from collections import namedtuple
import logging
import numpy as np
from scipy.stats import norm

ARMS = (0, 1)
OLS_RIDGE = 1e-6

logger = logging.getLogger("CausalICM")

ArmDataset = namedtuple("ArmDataset", "X y")
CatePosterior = namedtuple("CatePosterior", "mean variance ci_low ci_high level")


class CateEstimate(object):
    """Posterior of tau at a set of points. Iterating yields one CatePosterior per point."""

    def __init__(self, mean, variance, level):
        self.mean = np.asarray(mean, dtype=float)
        self.variance = np.asarray(variance, dtype=float)
        self.level = check_level(level)
        half_width = z_value(self.level) * np.sqrt(self.variance)
        self.ci_low = self.mean - half_width
        self.ci_high = self.mean + half_width

    def __len__(self):
        return self.mean.size

    def __getitem__(self, i):
        return CatePosterior(float(self.mean[i]), float(self.variance[i]),
                             float(self.ci_low[i]), float(self.ci_high[i]), self.level)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def check_level(level):
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValidationError("Credible level must lie in (0, 1), got {0}.".format(level))
    return level


def z_value(level):
    return float(norm.ppf(0.5 * (1.0 + check_level(level))))


def split_arms(dataset):
    """ArmDataset per treatment arm. An empty arm is a data-shape error naming the cell."""
    arms = {}
    for a in ARMS:
        X, y = dataset.arm(a)
        if y.size == 0:
            raise DataShapeError("The (study {0}, arm {1}) cell is empty.".format(
                dataset.study, a))
        arms[a] = ArmDataset(X, y)
    return arms


def pool_datasets(*datasets):
    """Stack several studies into one dataset labelled with the first study."""
    return Dataset(np.vstack([d.X for d in datasets]), np.concatenate([d.y for d in datasets]),
                   np.concatenate([d.a for d in datasets]), datasets[0].study)


class TwoArmModel(object):
    """Shared prediction for models built from one regression per arm.

    Subclasses implement _arm_posterior(arm, Z) on standardized covariates Z, returning
    centered means and variances of the experimental surface."""

    def __init__(self, standardizer, offsets, hyperparameters):
        self.standardizer = standardizer
        self.offsets = offsets
        self.hyperparameters = hyperparameters

    def predict(self, X, level=0.95):
        Z = self.standardizer.transform(X)
        m1, v1 = self._arm_posterior(1, Z)
        m0, v0 = self._arm_posterior(0, Z)
        mean = (m1 + self.offsets[1]) - (m0 + self.offsets[0])
        return CateEstimate(mean, v1 + v0, level)

    def _arm_posterior(self, arm, Z):
        raise NotImplementedError

    def report(self):
        return {"standardization": self.standardizer.to_json(),
                "offsets": {str(a): self.offsets[a] for a in ARMS},
                "arms": {str(a): self.hyperparameters[a].to_json() for a in ARMS}}


class CateModel(TwoArmModel):
    """Two rank-2 ICMs, one per arm, sharing rho but not kernel hyperparameters."""

    method = "causal_icm"

    def __init__(self, icm_arm0, icm_arm1, rho, standardizer, offsets, hyperparameters,
                 selection=None):
        super(CateModel, self).__init__(standardizer, offsets, hyperparameters)
        self.icm_arm0 = icm_arm0
        self.icm_arm1 = icm_arm1
        self.rho = rho
        self.selection = selection

    def _arm_posterior(self, arm, Z):
        return icm_predict(self.icm_arm1 if arm == 1 else self.icm_arm0, Z, "FE")

    def report(self):
        blob = super(CateModel, self).report()
        blob["method"] = self.method
        blob["rho"] = self.rho
        blob["selection"] = self.selection.to_json() if self.selection else None
        for a, model in zip(ARMS, (self.icm_arm0, self.icm_arm1)):
            blob["arms"][str(a)]["summary"] = model.summary()
        return blob


class TLearnerModel(TwoArmModel):
    """Independent single-task GPs per arm."""

    method = "gp_tlearner"

    def __init__(self, gp_arm0, gp_arm1, standardizer, offsets, hyperparameters):
        super(TLearnerModel, self).__init__(standardizer, offsets, hyperparameters)
        self.gp_arm0 = gp_arm0
        self.gp_arm1 = gp_arm1

    def _arm_posterior(self, arm, Z):
        return gp_posterior(self.gp_arm1 if arm == 1 else self.gp_arm0, Z)

    def report(self):
        blob = super(TLearnerModel, self).report()
        blob["method"] = self.method
        for a, model in zip(ARMS, (self.gp_arm0, self.gp_arm1)):
            blob["arms"][str(a)]["summary"] = {"lml": log_marginal_likelihood(model),
                                              "n": model.n}
        return blob


class GroundingModel(object):
    """Observational T-learner plus a linear bias correction learned on the trial."""

    method = "experimental_grounding"

    def __init__(self, omega_model, theta, theta_covariance, treatment_probability):
        self.omega_model = omega_model
        self.theta = theta
        self.theta_covariance = theta_covariance
        self.treatment_probability = treatment_probability

    @property
    def hyperparameters(self):
        return self.omega_model.hyperparameters

    def predict(self, X, level=0.95):
        X = as_matrix(X, self.theta.size - 1)
        omega = self.omega_model.predict(X, level)
        design = _with_intercept(X)
        correction_variance = np.einsum("ij,jk,ik->i", design, self.theta_covariance, design)
        return CateEstimate(omega.mean + design.dot(self.theta),
                            omega.variance + np.maximum(correction_variance, 0.0), level)

    def report(self):
        return {"method": self.method, "theta": self.theta.tolist(),
                "treatment_probability": self.treatment_probability,
                "observational_model": self.omega_model.report()}


def fit_causal_icm_cate(rct, obs, rho="auto", kernel_family="rbf", seed=0, grid=DEFAULT_GRID,
                        folds=DEFAULT_FOLDS, tuning_mode="refit", restarts=DEFAULT_RESTARTS,
                        standardizer=None, offsets=None, hyperparameters=None):
    """Fit one ICM per arm at a common rho. rho="auto" tunes it by cross-validation with the
    loss averaged over arms. Passing standardizer, offsets and per-arm hyperparameters
    freezes them instead of estimating them from the data."""
    arms, standardizer, offsets = arm_blocks(rct, obs, standardizer, offsets)

    selection = None
    if rho == "auto":
        selection = tune_rho_arms(arms, grid=grid, folds=folds, seed=seed, family=kernel_family,
                                  mode=tuning_mode, restarts=restarts)
        rho = selection.chosen_rho
        logger.info("Cross-validation chose rho = {0:.2f}.".format(rho))
    rho = float(rho)

    models = {}
    fitted = {}
    for a in ARMS:
        De, Do = arms[a]
        if hyperparameters is not None:
            hyper = hyperparameters[a]
            models[a] = icm_fit(De, Do, rho, hyper.kernel, hyper.noise_variance)
            fitted[a] = hyper
        else:
            models[a], fitted[a] = optimize_icm(De, Do, rho, kernel_family, restarts, seed)
    return CateModel(models[0], models[1], rho, standardizer, offsets, fitted, selection)


def arm_blocks(rct, obs, standardizer=None, offsets=None):
    """Per-arm ((X_e, y_e), (X_o, y_o)) on standardized covariates with centered outcomes.

    Returns the blocks with the standardizer and outcome offsets used to build them."""
    trial = split_arms(rct)
    observational = split_arms(obs)
    if standardizer is None:
        standardizer = Standardizer.from_covariates(rct.X, obs.X)
    if offsets is None:
        offsets = {a: float(np.mean(np.concatenate([trial[a].y, observational[a].y])))
                   for a in ARMS}
    arms = {}
    for a in ARMS:
        arms[a] = ((standardizer.transform(trial[a].X), trial[a].y - offsets[a]),
                   (standardizer.transform(observational[a].X), observational[a].y - offsets[a]))
    return arms, standardizer, offsets


def predict_cate(model, X, level=0.95):
    return model.predict(X, level)


def fit_tlearner_gp(data, kernel_family="rbf", seed=0, restarts=DEFAULT_RESTARTS,
                    standardizer=None, offsets=None, hyperparameters=None):
    """GP T-learner on one dataset; the GP(exp) and GP(obs) baselines."""
    arms = split_arms(data)
    if standardizer is None:
        standardizer = Standardizer.from_covariates(data.X)
    if offsets is None:
        offsets = {a: float(np.mean(arms[a].y)) for a in ARMS}
    models = {}
    fitted = {}
    for a in ARMS:
        Z = standardizer.transform(arms[a].X)
        y = arms[a].y - offsets[a]
        if hyperparameters is not None:
            hyper = hyperparameters[a]
        elif y.size < 2:
            raise DataShapeError("The (study {0}, arm {1}) cell needs at least two units to "
                                 "estimate hyperparameters.".format(data.study, a))
        else:
            hyper = optimize_hyperparameters(Z, y, kernel_family, restarts=restarts, seed=seed)
        models[a] = gp_fit(Z, y, hyper.kernel, hyper.noise_variance)
        fitted[a] = hyper
    return TLearnerModel(models[0], models[1], standardizer, offsets, fitted)


def ipw_pseudo_outcome(y, a, treatment_probability=TRIAL_TREATMENT_PROBABILITY):
    """Y·(A - e) / (e·(1 - e)); its conditional mean in a trial is the CATE."""
    e = float(treatment_probability)
    if not 0.0 < e < 1.0:
        raise ValidationError("Treatment probability must lie in (0, 1), got {0}.".format(e))
    return np.asarray(y, dtype=float) * (np.asarray(a, dtype=float) - e) / (e * (1.0 - e))


def fit_experimental_grounding(rct, obs, kernel_family="rbf", seed=0,
                               treatment_probability=TRIAL_TREATMENT_PROBABILITY,
                               restarts=DEFAULT_RESTARTS):
    """Two-step comparator: an observational GP T-learner, then an OLS fit of the trial
    pseudo-outcome residuals on [1, x] as the bias function."""
    split_arms(rct)
    omega_model = fit_tlearner_gp(obs, kernel_family, seed, restarts)
    psi = ipw_pseudo_outcome(rct.y, rct.a, treatment_probability)
    residual = psi - omega_model.predict(rct.X).mean
    design = _with_intercept(rct.X)
    theta, covariance = _least_squares(design, residual)
    logger.debug("Grounding bias coefficients: {0}".format(np.round(theta, 4).tolist()))
    return GroundingModel(omega_model, theta, covariance, float(treatment_probability))


def frozen_from_report(blob):
    """Standardizer, offsets and per-arm hyperparameters stored in a fit report."""
    try:
        standardizer = Standardizer.from_json(blob["standardization"])
        offsets = {a: float(blob["offsets"][str(a)]) for a in ARMS}
        hyper = {a: Hyperparameters.from_json(blob["arms"][str(a)]) for a in ARMS}
    except (KeyError, TypeError, ValueError):
        raise ValidationError("The fit report lacks standardization, offsets or per-arm "
                              "hyperparameters.")
    return standardizer, offsets, hyper


def _with_intercept(X):
    X = as_matrix(X)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _least_squares(design, target):
    """OLS coefficients and their covariance; falls back to a tiny ridge if singular."""
    n, k = design.shape
    gram = design.T.dot(design)
    if n < k or np.linalg.matrix_rank(design) < k:
        logger.info("Singular least-squares design; adding ridge {0:g}.".format(OLS_RIDGE))
        gram = gram + OLS_RIDGE * np.eye(k)
    try:
        inverse = np.linalg.inv(gram)
    except np.linalg.LinAlgError:
        logger.info("Least-squares normal equations failed; adding ridge {0:g}.".format(
            OLS_RIDGE))
        try:
            inverse = np.linalg.inv(gram + OLS_RIDGE * np.eye(k))
        except np.linalg.LinAlgError:
            raise NumericalError("Least-squares normal equations are singular even with ridge "
                                 "{0:g}.".format(OLS_RIDGE), {"n": n, "k": k})
    theta = inverse.dot(design.T.dot(target))
    residual = target - design.dot(theta)
    dof = n - k if n > k else max(n, 1)
    return theta, inverse * (residual.dot(residual) / dof)
