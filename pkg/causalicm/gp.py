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

"""Single-task GP regression: factorization, prediction, marginal likelihood and the
Nelder-Mead hyperparameter search that the ICM also runs through."""

from causalicm.errors import NumericalError, UsageError, ValidationError
from causalicm.kernels import KernelSpec, kernel_diag, kernel_matrix
from collections import namedtuple
import logging
import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

JITTER_START = 1e-10
JITTER_MAX = 1e-4
LOG_BOUNDS = (-6.0, 6.0)
NOISE_FLOOR = 1e-6
MAX_ITER = 500
SPREAD_TOL = 1e-6
CLAMP_TOL = 1e-10
DEFAULT_RESTARTS = 3
_LOG_2PI = np.log(2.0 * np.pi)

logger = logging.getLogger("CausalICM")


class Hyperparameters(namedtuple("Hyperparameters", "kernel noise_variance lml initial_lml")):
    """Result of a marginal likelihood search. initial_lml is the value at the default start."""

    __slots__ = ()

    def to_json(self):
        return {"kernel": self.kernel.to_json(), "noise_variance": self.noise_variance,
                "lml": self.lml, "initial_lml": self.initial_lml}

    @classmethod
    def from_json(cls, blob):
        try:
            return cls(KernelSpec.from_json(blob["kernel"]), float(blob["noise_variance"]),
                       float(blob.get("lml", np.nan)), float(blob.get("initial_lml", np.nan)))
        except (KeyError, TypeError, ValueError):
            raise ValidationError("Hyperparameters need 'kernel' and 'noise_variance'.")


class GpModel(object):
    """A fitted single-task GP. Nothing is modified after gp_fit returns it."""

    def __init__(self, kernel, noise_variance, X_train, y_train, chol, alpha, jitter=0.0):
        self.kernel = kernel
        self.noise_variance = noise_variance
        self.X_train = X_train
        self.y_train = y_train
        self.chol = chol
        self.alpha = alpha
        self.jitter = jitter

    @property
    def n(self):
        return self.y_train.size

    def posterior(self, X_star):
        return gp_posterior(self, X_star)

    def log_marginal_likelihood(self):
        return log_marginal_likelihood(self)


class Standardizer(object):
    """Per-dimension covariate standardization, computed once from pooled training inputs."""

    def __init__(self, mean, scale):
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        self.scale = np.asarray(scale, dtype=float).reshape(-1)
        if self.mean.shape != self.scale.shape or np.any(self.scale <= 0):
            raise ValidationError("Standardization needs matching means and positive scales.")

    @classmethod
    def from_covariates(cls, *Xs):
        pooled = np.vstack([as_matrix(X) for X in Xs if np.size(X)])
        scale = pooled.std(axis=0)
        # Constant columns are only centered
        scale[scale <= 1e-12] = 1.0
        return cls(pooled.mean(axis=0), scale)

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self):
        return self.mean.size

    def transform(self, X):
        X = as_matrix(X, self.dim)
        return (X - self.mean) / self.scale

    def to_json(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_json(cls, blob):
        try:
            return cls(blob["mean"], blob["scale"])
        except (KeyError, TypeError):
            raise ValidationError("Standardization needs 'mean' and 'scale'.")


def as_matrix(X, dim=None):
    """Coerce X to an n×p float matrix; 1-D input is read as one column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if dim in (None, 1) else X.reshape(-1, dim)
    if X.ndim != 2:
        raise UsageError("Covariates must be a matrix, got shape {0}.".format(X.shape))
    if dim is not None and X.shape[1] != dim:
        raise UsageError("Covariates have {0} columns, expected {1}.".format(X.shape[1], dim))
    return X


def cholesky_with_jitter(A):
    """Lower Cholesky factor of A, climbing the jitter ladder if plain factorization fails.

    Returns the factor and the absolute jitter that was added to the diagonal."""
    n = A.shape[0]
    if not np.all(np.isfinite(A)):
        raise NumericalError("Covariance matrix contains non-finite entries.", {"size": n})
    try:
        return cholesky(A, lower=True, check_finite=False), 0.0
    except LinAlgError:
        pass
    mean_diag = float(np.mean(np.diag(A)))
    step = JITTER_START
    while step <= JITTER_MAX * (1 + 1e-9):
        jitter = step * mean_diag
        try:
            chol = cholesky(A + jitter * np.eye(n), lower=True, check_finite=False)
        except LinAlgError:
            step *= 10
        else:
            logger.debug("Cholesky succeeded after adding jitter {0:.3g}.".format(jitter))
            return chol, jitter
    try:
        condition = float(np.linalg.cond(A))
    except LinAlgError:
        condition = float("inf")
    raise NumericalError("Cholesky factorization failed after jitter up to {0:.1g} times the "
                         "mean diagonal (condition number {1:.3g}).".format(JITTER_MAX, condition),
                         {"size": n, "condition": condition, "mean_diagonal": mean_diag})


def clamp_variances(variances):
    """Clamp tiny negative round-off at zero; larger violations are logged, then clamped."""
    worst = variances.min() if variances.size else 0.0
    if worst < -CLAMP_TOL:
        logger.warning("Posterior variance of {0:.3g} clamped at zero.".format(worst))
    return np.maximum(variances, 0.0)


def gp_fit(X, y, kernel, noise_variance):
    """Factorize K(X, X) + noise·I and solve for the weights alpha."""
    X = as_matrix(X, kernel.dim)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] < 1:
        raise UsageError("A GP needs at least one training point.")
    if y.size != X.shape[0]:
        raise UsageError("Got {0} covariate rows but {1} outcomes.".format(X.shape[0], y.size))
    noise_variance = float(noise_variance)
    if not noise_variance > 0:
        raise ValidationError("Noise variance must be positive, got {0}.".format(noise_variance))
    K = kernel_matrix(kernel, X)
    K[np.diag_indices_from(K)] += noise_variance
    chol, jitter = cholesky_with_jitter(K)
    alpha = cho_solve((chol, True), y, check_finite=False)
    return GpModel(kernel, noise_variance, X, y, chol, alpha, jitter)


def gp_posterior(model, X_star):
    """Posterior means and variances of the latent function at the rows of X_star."""
    X_star = as_matrix(X_star, model.kernel.dim)
    K_cross = kernel_matrix(model.kernel, model.X_train, X_star)
    means = K_cross.T.dot(model.alpha)
    v = solve_triangular(model.chol, K_cross, lower=True, check_finite=False)
    variances = kernel_diag(model.kernel, X_star) - np.sum(v * v, axis=0)
    return means, clamp_variances(variances)


def log_marginal_likelihood(model):
    return (-0.5 * model.y_train.dot(model.alpha) - np.sum(np.log(np.diag(model.chol))) -
            0.5 * model.n * _LOG_2PI)


def log_marginal_likelihood_at(X, y, family, theta):
    """LML of a single-task GP at log-hyperparameters [log ls..., log variance, log noise]."""
    theta = np.asarray(theta, dtype=float)
    kernel = KernelSpec.from_log_params(family, theta[:-1])
    return log_marginal_likelihood(gp_fit(X, y, kernel, np.exp(theta[-1])))


def optimize_hyperparameters(X, y, family, rho_context=None, restarts=DEFAULT_RESTARTS, seed=0):
    """Maximise the marginal likelihood over kernel lengthscales, signal and noise variance.

    Without rho_context the single-task LML of (X, y) is used. With it, the objective is
    rho_context.log_marginal_likelihood(kernel, noise_variance), the joint ICM likelihood at
    a fixed rho, and X, y only set the scale of the starting points."""
    X = as_matrix(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] < 2:
        raise UsageError("Hyperparameter optimization needs at least two points.")
    dim = X.shape[1]

    if rho_context is None:
        def objective(kernel, noise_variance):
            return log_marginal_likelihood(gp_fit(X, y, kernel, noise_variance))
    else:
        objective = rho_context.log_marginal_likelihood

    lower = np.array([LOG_BOUNDS[0]] * (dim + 1) + [np.log(NOISE_FLOOR)])
    upper = np.array([LOG_BOUNDS[1]] * (dim + 2))

    def lml(theta):
        theta = np.clip(theta, lower, upper)
        try:
            kernel = KernelSpec.from_log_params(family, theta[:-1])
            value = objective(kernel, np.exp(theta[-1]))
        except NumericalError:
            return -np.inf
        return value if np.isfinite(value) else -np.inf

    starts = _starting_points(y, dim, restarts, seed, lower, upper)
    initial_lml = lml(starts[0])
    best_theta, best_lml = None, -np.inf
    for index, theta0 in enumerate(starts):
        start_lml = lml(theta0)
        if start_lml > best_lml:
            best_theta, best_lml = theta0, start_lml
        result = minimize(lambda theta: -lml(theta), theta0, method="Nelder-Mead",
                          bounds=list(zip(lower, upper)),
                          options={"maxiter": MAX_ITER, "fatol": SPREAD_TOL, "xatol": np.inf,
                                   "initial_simplex": _initial_simplex(theta0, lower, upper)})
        theta = np.clip(result.x, lower, upper)
        found = lml(theta)
        logger.debug("Restart {0}: LML {1:.6g} -> {2:.6g} after {3} iterations.".format(
            index, start_lml, found, result.nit))
        # Strict improvement only, so ties go to the earliest restart
        if found > best_lml:
            best_theta, best_lml = theta, found
    if best_theta is None:
        raise NumericalError("Every optimizer restart failed to factorize the covariance.",
                             {"restarts": len(starts)})
    kernel = KernelSpec.from_log_params(family, best_theta[:-1])
    return Hyperparameters(kernel, float(np.exp(best_theta[-1])), float(best_lml),
                           float(initial_lml))


def _starting_points(y, dim, restarts, seed, lower, upper):
    """Default start, then 0.1x and 10x the default scales, then seeded random draws."""
    signal = float(np.var(y)) if y.size > 1 and np.var(y) > 1e-8 else 1.0
    default = np.array([0.0] * dim + [np.log(signal), np.log(0.1 * signal)])
    starts = [default, default + np.log(0.1), default + np.log(10.0)][:max(1, restarts)]
    rng = np.random.default_rng(seed)
    while len(starts) < restarts:
        starts.append(default + rng.uniform(-2.0, 2.0, size=default.size))
    return [np.clip(theta, lower, upper) for theta in starts]


def _initial_simplex(theta0, lower, upper, step=0.5):
    simplex = [theta0]
    for i in range(theta0.size):
        vertex = theta0.copy()
        vertex[i] = vertex[i] + step if vertex[i] + step <= upper[i] else vertex[i] - step
        simplex.append(np.clip(vertex, lower, upper))
    return np.array(simplex)
