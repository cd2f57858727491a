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

"""Seeded generators for the four trial + observational study scenarios.

Random numbers come from numpy's Philox (counter-based) bit generator seeded with the
integer seed, drawn in this order:

    1. covariates: trial candidate pool (pool_size × dim), then observational (n_obs × dim),
       all Unif[-2, 2]
    2. selection: pool_size uniforms, compared against p(S = 1 | x)
    3. treatment: pool_size uniforms (coin flip), then n_obs uniforms against e(x)
    4. confounder: n_obs normals U ~ N((2A - 1)·g(x), 1)
    5. noise: pool_size normals, then n_obs normals

Every pool candidate consumes its draws whether or not it is selected into the trial."""

from causalicm.errors import DataShapeError, ValidationError
from causalicm.gp import as_matrix
from collections import namedtuple
import logging
import numpy as np
from scipy.special import expit

SCENARIOS = ("uni1", "uni2", "multi1", "multi2")
SUPPORT = (-2.0, 2.0)
TRIAL_TREATMENT_PROBABILITY = 0.5
STUDIES = ("E", "O")

logger = logging.getLogger("CausalICM")

ConfoundingCheck = namedtuple("ConfoundingCheck", "sign error stated_error")


class Dataset(object):
    """Covariates, outcomes, binary treatment and the study label of one study."""

    def __init__(self, X, y, a, study):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        a = np.asarray(a).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.size or a.size != y.size:
            raise DataShapeError("Dataset columns disagree: X {0}, y {1}, a {2}.".format(
                X.shape, y.size, a.size))
        if not np.all((a == 0) | (a == 1)):
            raise DataShapeError("Treatment must be 0 or 1.")
        if study not in STUDIES:
            raise ValidationError("Study must be one of {0}, got '{1}'.".format(STUDIES, study))
        self.X = X
        self.y = y
        self.a = a.astype(int)
        self.study = study

    n = property(lambda self: self.y.size)
    dim = property(lambda self: self.X.shape[1])

    def arm(self, a):
        """(X, y) of the units with treatment a."""
        mask = self.a == a
        return self.X[mask], self.y[mask]

    def __len__(self):
        return self.n

    def __repr__(self):
        return "Dataset(study={0}, n={1}, dim={2}, treated={3})".format(
            self.study, self.n, self.dim, int(self.a.sum()))


class SimScenario(object):
    """One of the four simulation designs. selection_scale multiplies the trial-selection
    logit: 1 reproduces the published design, smaller values increase overlap."""

    def __init__(self, id, pool_size=1000, n_obs=1000, selection_scale=1.0):
        id = str(id).lower()
        if id not in SCENARIOS:
            raise ValidationError("Unknown scenario '{0}'. Use one of {1}.".format(
                id, ", ".join(SCENARIOS)))
        if int(pool_size) < 1 or int(n_obs) < 1:
            raise ValidationError("pool_size and n_obs must be at least 1.")
        if float(selection_scale) < 0:
            raise ValidationError("selection_scale must be non-negative.")
        self.id = id
        self.pool_size = int(pool_size)
        self.n_obs = int(n_obs)
        self.selection_scale = float(selection_scale)

    @property
    def dim(self):
        return 1 if self.id.startswith("uni") else 5

    def replace(self, **changes):
        fields = {"id": self.id, "pool_size": self.pool_size, "n_obs": self.n_obs,
                  "selection_scale": self.selection_scale}
        fields.update(changes)
        return SimScenario(**fields)

    def to_json(self):
        return {"id": self.id, "dim": self.dim, "pool_size": self.pool_size,
                "n_obs": self.n_obs, "selection_scale": self.selection_scale}

    def __repr__(self):
        return "SimScenario({0}, pool_size={1}, n_obs={2}, selection_scale={3})".format(
            self.id, self.pool_size, self.n_obs, self.selection_scale)


class GroundTruth(object):
    """Oracle functions of a scenario. Each accepts one point or a matrix of points.

    eta follows the stated convention (2·g for a confounder mean (2A - 1)·g(x)); omega_obs is
    the observational arm contrast implied by the outcome model, tau + 2·g."""

    def __init__(self, scenario):
        self.scenario = scenario

    def tau(self, X):
        return self._apply(_TAU[self.scenario.id], X)

    def eta(self, X):
        return self._apply(lambda Z: 2.0 * _CONFOUNDER[self.scenario.id](Z), X)

    def omega_obs(self, X):
        return self._apply(lambda Z: _TAU[self.scenario.id](Z) +
                           2.0 * _CONFOUNDER[self.scenario.id](Z), X)

    def baseline(self, X):
        return self._apply(_BASELINE[self.scenario.id], X)

    def to_json(self):
        return {"scenario": self.scenario.to_json(), "tau": _TAU_TEXT[self.scenario.id],
                "eta": _ETA_TEXT[self.scenario.id]}

    def _apply(self, func, X):
        single = np.ndim(X) <= 1 and np.size(X) == self.scenario.dim
        values = func(as_matrix(np.atleast_1d(X), self.scenario.dim))
        return float(values[0]) if single else values


_TAU = {
    "uni1": lambda X: 1.0 + X[:, 0],
    "uni2": lambda X: 1.0 + X[:, 0] + X[:, 0] ** 2,
    "multi1": lambda X: 1.0 + X[:, 0] + X[:, 1],
    "multi2": lambda X: 1.0 + X[:, 0] + X[:, 0] ** 2 + X[:, 1] + X[:, 1] ** 2,
}
_BASELINE = {
    "uni1": lambda X: X[:, 0],
    "uni2": lambda X: X[:, 0] ** 2 - 1.0,
    "multi1": lambda X: X.sum(axis=1),
    "multi2": lambda X: X.sum(axis=1),
}
_CONFOUNDER = {
    "uni1": lambda X: X[:, 0],
    "uni2": lambda X: np.sin(X[:, 0] - 1.0),
    "multi1": lambda X: X[:, 0] + X[:, 1],
    "multi2": lambda X: np.sin(X[:, 0]) + np.sin(X[:, 1]),
}
_SELECTION_LOGIT = {
    "uni": lambda X: -3.0 - 3.0 * X[:, 0],
    "multi": lambda X: -10.0 - 8.0 * X[:, 0] - 8.0 * X[:, 1],
}
_TREATMENT_LOGIT = {
    "uni": lambda X: -X[:, 0],
    "multi": lambda X: -(X[:, 0] + X[:, 1]),
}
_TAU_TEXT = {"uni1": "1 + x1", "uni2": "1 + x1 + x1^2", "multi1": "1 + x1 + x2",
             "multi2": "1 + x1 + x1^2 + x2 + x2^2"}
_ETA_TEXT = {"uni1": "2*x1", "uni2": "2*sin(x1 - 1)", "multi1": "2*(x1 + x2)",
             "multi2": "2*(sin(x1) + sin(x2))"}


def selection_probability(scenario, X):
    """p(S = 1 | x) for trial participation, after scaling the logit."""
    family = "uni" if scenario.id.startswith("uni") else "multi"
    return expit(scenario.selection_scale * _SELECTION_LOGIT[family](as_matrix(X, scenario.dim)))


def treatment_probability(scenario, X):
    """Observational propensity e(x)."""
    family = "uni" if scenario.id.startswith("uni") else "multi"
    return expit(_TREATMENT_LOGIT[family](as_matrix(X, scenario.dim)))


def simulate(scenario, seed):
    """Draw a trial and an observational study. Returns (rct, obs, truth)."""
    rng = np.random.Generator(np.random.Philox(seed))
    dim = scenario.dim
    tau = _TAU[scenario.id]
    baseline = _BASELINE[scenario.id]

    X_pool = rng.uniform(SUPPORT[0], SUPPORT[1], size=(scenario.pool_size, dim))
    X_obs = rng.uniform(SUPPORT[0], SUPPORT[1], size=(scenario.n_obs, dim))
    selected = rng.uniform(size=scenario.pool_size) < selection_probability(scenario, X_pool)
    a_pool = (rng.uniform(size=scenario.pool_size) < TRIAL_TREATMENT_PROBABILITY).astype(int)
    a_obs = (rng.uniform(size=scenario.n_obs) < treatment_probability(scenario, X_obs)).astype(int)
    u = rng.normal(loc=(2 * a_obs - 1) * _CONFOUNDER[scenario.id](X_obs), scale=1.0)
    noise_pool = rng.normal(size=scenario.pool_size)
    noise_obs = rng.normal(size=scenario.n_obs)

    y_pool = a_pool * tau(X_pool) + baseline(X_pool) + noise_pool
    y_obs = a_obs * tau(X_obs) + baseline(X_obs) + u + noise_obs
    rct = Dataset(X_pool[selected], y_pool[selected], a_pool[selected], "E")
    obs = Dataset(X_obs, y_obs, a_obs, "O")
    logger.debug("Simulated {0} with seed {1}: {2} trial units from a pool of {3}.".format(
        scenario.id, seed, rct.n, scenario.pool_size))
    return rct, obs, GroundTruth(scenario)


def eval_grid(scenario, n_points, seed=0):
    """Evaluation points: an equispaced grid on the support in one dimension, a seeded
    uniform sample of the support otherwise."""
    n_points = int(n_points)
    if n_points < 2:
        raise ValidationError("An evaluation grid needs at least two points.")
    if scenario.dim == 1:
        return np.linspace(SUPPORT[0], SUPPORT[1], n_points).reshape(-1, 1)
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(SUPPORT[0], SUPPORT[1], size=(n_points, scenario.dim))


def contrast_features(X):
    """Additive basis [1, x, x², sin x, cos x] per dimension; spans every scenario's truth."""
    X = as_matrix(X)
    return np.hstack([np.ones((X.shape[0], 1)), X, X ** 2, np.sin(X), np.cos(X)])


def estimate_arm_contrast(dataset, X_grid):
    """Difference of per-arm least-squares fits of y on the additive basis, at X_grid."""
    predictions = []
    for a in (0, 1):
        X, y = dataset.arm(a)
        coef, _, _, _ = np.linalg.lstsq(contrast_features(X), y, rcond=None)
        predictions.append(contrast_features(as_matrix(X_grid, dataset.dim)).dot(coef))
    return predictions[1] - predictions[0]


def check_confounding_sign(scenario, seed=0, n_obs=100000, X_grid=None):
    """Resolve empirically whether the observational contrast is tau - eta or tau + eta.

    Returns the sign s with contrast ≈ tau - s·eta, the max error under that sign and the
    max error under the stated convention (s = +1)."""
    large = scenario.replace(n_obs=n_obs, pool_size=1)
    _, obs, truth = simulate(large, seed)
    if X_grid is None:
        X_grid = (np.linspace(-1.5, 1.5, 9).reshape(-1, 1) if scenario.dim == 1
                  else eval_grid(scenario, 9, seed))
    contrast = estimate_arm_contrast(obs, X_grid)
    tau, eta = truth.tau(X_grid), truth.eta(X_grid)
    stated_error = float(np.max(np.abs(contrast - (tau - eta))))
    flipped_error = float(np.max(np.abs(contrast - (tau + eta))))
    if flipped_error < stated_error:
        logger.warning("{0}: the observational contrast matches tau + eta (max error {1:.3f}), "
                       "not tau - eta (max error {2:.3f}); eta is reported with the stated "
                       "sign.".format(scenario.id, flipped_error, stated_error))
        return ConfoundingCheck(-1, flipped_error, stated_error)
    logger.info("{0}: the observational contrast matches tau - eta (max error {1:.3f}).".format(
        scenario.id, stated_error))
    return ConfoundingCheck(1, stated_error, stated_error)
