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

"""Choosing rho by weighted cross-validation on held-out trial units."""

from causalicm.errors import NumericalError, UsageError, ValidationError
from causalicm.gp import DEFAULT_RESTARTS, as_matrix
from causalicm.icm import icm_fit, icm_predict, optimize_icm
import logging
import numpy as np
from scipy.special import expit

DEFAULT_GRID = tuple(np.round(np.linspace(0.0, 1.0, 11), 1))
DEFAULT_FOLDS = 5
TUNING_MODES = ("refit", "fast")
FAST_MODE_RHO = 0.5
PROPENSITY_CLIP = 0.99
IRLS_MAX_ITER = 100
IRLS_TOL = 1e-8
RIDGE_ESCALATIONS = 3

logger = logging.getLogger("CausalICM")


class LogisticModel(object):
    """Ridge logistic regression of the observational-study label on covariates."""

    def __init__(self, intercept, coefficients, ridge_lambda):
        self.intercept = float(intercept)
        self.coefficients = np.asarray(coefficients, dtype=float).reshape(-1)
        self.ridge_lambda = float(ridge_lambda)

    def predict_proba(self, X):
        """p(S = o | x), kept strictly inside (0, 1)."""
        X = as_matrix(X, self.coefficients.size)
        eps = np.finfo(float).eps
        return np.clip(expit(self.intercept + X.dot(self.coefficients)), eps, 1.0 - eps)

    def to_json(self):
        return {"intercept": self.intercept, "coefficients": self.coefficients.tolist(),
                "ridge_lambda": self.ridge_lambda}


class RhoSelection(object):
    """Grid, summed CV losses per grid value, the chosen rho and the fold of each trial unit.

    When rho is tuned for both arms at once, losses are averaged across arms and
    fold_assignments holds one array per arm."""

    def __init__(self, grid, losses, chosen_rho, fold_assignments):
        self.grid = np.asarray(grid, dtype=float)
        self.losses = np.asarray(losses, dtype=float)
        self.chosen_rho = float(chosen_rho)
        self.fold_assignments = fold_assignments

    def to_json(self):
        if isinstance(self.fold_assignments, dict):
            folds = {str(k): np.asarray(v).tolist() for k, v in self.fold_assignments.items()}
        else:
            folds = np.asarray(self.fold_assignments).tolist()
        return {"grid": self.grid.tolist(), "losses": self.losses.tolist(),
                "chosen_rho": self.chosen_rho, "fold_assignments": folds}


def fit_study_propensity(X_e, X_o, ridge_lambda=None):
    """Fit p(S = o | x) by iteratively reweighted least squares.

    The ridge penalty (default 1e-4·n) applies to the slopes only. If Newton steps stop
    making progress the penalty is raised tenfold, at most three times."""
    X_e = as_matrix(X_e)
    X_o = as_matrix(X_o, X_e.shape[1])
    if X_e.shape[0] < 1 or X_o.shape[0] < 1:
        raise UsageError("The study propensity needs units from both studies.")
    X = np.vstack([X_e, X_o])
    label = np.concatenate([np.zeros(X_e.shape[0]), np.ones(X_o.shape[0])])
    ridge = 1e-4 * X.shape[0] if ridge_lambda is None else float(ridge_lambda)
    for attempt in range(RIDGE_ESCALATIONS + 1):
        beta = _irls(X, label, ridge)
        if beta is not None:
            return LogisticModel(beta[0], beta[1:], ridge)
        logger.info("IRLS did not converge with ridge {0:.3g}; retrying with {1:.3g}.".format(
            ridge, ridge * 10))
        ridge *= 10
    raise NumericalError("Study propensity fit diverged even with ridge {0:.3g}.".format(
        ridge / 10), {"n": X.shape[0]})


def _irls(X, label, ridge):
    """Newton iterations on the penalized log-likelihood with step halving."""
    design = np.hstack([np.ones((X.shape[0], 1)), X])
    penalty = np.full(design.shape[1], ridge)
    penalty[0] = 0.0
    beta = np.zeros(design.shape[1])

    def objective(b):
        eta = design.dot(b)
        return np.sum(label * eta - np.logaddexp(0.0, eta)) - 0.5 * np.sum(penalty * b * b)

    current = objective(beta)
    for _ in range(IRLS_MAX_ITER):
        p = expit(design.dot(beta))
        w = p * (1.0 - p)
        gradient = design.T.dot(label - p) - penalty * beta
        hessian = (design * w[:, None]).T.dot(design) + np.diag(penalty)
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        scale = 1.0
        while scale > 1e-10:
            candidate = beta + scale * step
            value = objective(candidate)
            if value >= current - 1e-12:
                break
            scale *= 0.5
        else:
            return None
        change = np.max(np.abs(candidate - beta))
        beta, current = candidate, value
        if change < IRLS_TOL:
            return beta
    return None


def propensity_weights(model, X):
    """w(x) = 1 / (1 - p(S = o | x)) with p clipped at 0.99, so weights lie in [1, 100]."""
    return 1.0 / (1.0 - np.minimum(model.predict_proba(X), PROPENSITY_CLIP))


def assign_folds(n, folds, seed):
    """Random balanced partition of n trial units into folds."""
    if folds < 2:
        raise ValidationError("Cross-validation needs at least two folds.")
    if n < folds:
        raise ValidationError("{0} trial units cannot fill {1} folds.".format(n, folds))
    order = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=int)
    assignment[order] = np.arange(n) % folds
    if np.bincount(assignment, minlength=folds).min() < 2:
        raise ValidationError("Every fold needs at least two trial units; have {0} units for "
                              "{1} folds.".format(n, folds))
    return assignment


def tune_rho(De, Do, grid=DEFAULT_GRID, folds=DEFAULT_FOLDS, seed=0, family="rbf",
             mode="refit", restarts=DEFAULT_RESTARTS, propensity=None):
    """Pick rho for one arm by minimizing the weighted held-out error on trial units."""
    X_e, y_e = as_matrix(De[0]), np.asarray(De[1], dtype=float).reshape(-1)
    X_o, y_o = _observational(Do, X_e.shape[1])
    grid = _check_grid(grid)
    assignment = assign_folds(y_e.size, folds, seed)
    if propensity is None:
        propensity = _propensity_or_none(X_e, X_o)
    losses = rho_losses((X_e, y_e), (X_o, y_o), grid, assignment, propensity, family, mode,
                        restarts, seed)
    return RhoSelection(grid, losses, choose_rho(grid, losses), assignment)


def tune_rho_arms(arms, grid=DEFAULT_GRID, folds=DEFAULT_FOLDS, seed=0, family="rbf",
                  mode="refit", restarts=DEFAULT_RESTARTS, propensity=None):
    """Pick one rho for several arms by averaging their losses.

    arms maps an arm label to a (De, Do) pair; propensity is fitted on the pooled covariates
    of every arm unless given."""
    grid = _check_grid(grid)
    if propensity is None:
        X_e = np.vstack([as_matrix(De[0]) for De, _ in arms.values()])
        dim = X_e.shape[1]
        X_o = np.vstack([_observational(Do, dim)[0] for _, Do in arms.values()])
        propensity = _propensity_or_none(X_e, X_o)
    total = np.zeros(grid.size)
    assignments = {}
    for label in sorted(arms):
        De, Do = arms[label]
        X_e, y_e = as_matrix(De[0]), np.asarray(De[1], dtype=float).reshape(-1)
        assignment = assign_folds(y_e.size, folds, seed)
        total += rho_losses((X_e, y_e), _observational(Do, X_e.shape[1]), grid, assignment,
                            propensity, family, mode, restarts, seed)
        assignments[label] = assignment
    losses = total / len(arms)
    return RhoSelection(grid, losses, choose_rho(grid, losses), assignments)


def rho_losses(De, Do, grid, assignment, propensity, family, mode="refit",
               restarts=DEFAULT_RESTARTS, seed=0):
    """Summed weighted squared error over held-out trial folds, one value per grid rho.

    Only trial units are ever held out; the observational data is always in training."""
    if mode not in TUNING_MODES:
        raise ValidationError("Unknown tuning mode '{0}'. Use 'refit' or 'fast'.".format(mode))
    X_e, y_e = De
    X_o, y_o = Do
    weights = (np.ones(y_e.size) if propensity is None
               else propensity_weights(propensity, X_e))
    frozen = None
    if mode == "fast":
        _, frozen = optimize_icm((X_e, y_e), (X_o, y_o), FAST_MODE_RHO, family, restarts, seed)
    losses = np.zeros(len(grid))
    for fold in range(assignment.max() + 1):
        held_out = assignment == fold
        train = (X_e[~held_out], y_e[~held_out])
        for i, rho in enumerate(grid):
            if frozen is None:
                model, _ = optimize_icm(train, (X_o, y_o), rho, family, restarts, seed)
            else:
                model = icm_fit(train, (X_o, y_o), rho, frozen.kernel, frozen.noise_variance)
            means, _ = icm_predict(model, X_e[held_out], "FE")
            losses[i] += np.sum(weights[held_out] * (y_e[held_out] - means) ** 2)
    logger.debug("CV losses over rho: {0}".format(
        ", ".join("{0:.2f}: {1:.4g}".format(r, l) for r, l in zip(grid, losses))))
    return losses


def choose_rho(grid, losses):
    """Grid value with the smallest loss; near-ties go to the smaller rho."""
    grid = np.asarray(grid, dtype=float)
    losses = np.asarray(losses, dtype=float)
    best = np.min(losses)
    tied = np.abs(losses - best) <= 1e-8 * max(1.0, abs(best))
    return float(np.min(grid[tied]))


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid < 0) or np.any(grid > 1):
        raise ValidationError("The rho grid must be a non-empty subset of [0, 1].")
    return grid


def _observational(Do, dim):
    if Do is None or np.size(Do[1]) == 0:
        return np.zeros((0, dim)), np.zeros(0)
    return as_matrix(Do[0], dim), np.asarray(Do[1], dtype=float).reshape(-1)


def _propensity_or_none(X_e, X_o):
    """No observational units means every trial unit gets weight one."""
    if X_o.shape[0] == 0:
        return None
    return fit_study_propensity(X_e, X_o)
