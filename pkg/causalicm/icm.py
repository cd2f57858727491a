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

"""The rank-2 intrinsic coregionalization model for one treatment arm.

Task "FE" is the experimental regression surface f^e, "FO" the observational surface f^o
and "ETA" their difference, the confounding function. B is parameterized by a single
borrowing parameter rho: f^e = u1 and f^o = rho·u1 + sqrt(1 - rho²)·u2."""

from causalicm.errors import UsageError, ValidationError
from causalicm.gp import (DEFAULT_RESTARTS, Hyperparameters, as_matrix, cholesky_with_jitter,
                          clamp_variances, optimize_hyperparameters)
from causalicm.kernels import kernel_matrix
from collections import namedtuple
import logging
import numpy as np
from scipy.linalg import cho_solve, solve_triangular

TASKS = ("FE", "FO", "ETA")
BOUND_TOL = 1e-10
_LOG_2PI = np.log(2.0 * np.pi)

logger = logging.getLogger("CausalICM")

TaskPosterior = namedtuple("TaskPosterior", "mean variance task")
VarianceBound = namedtuple("VarianceBound",
                           "v_full v_rct_only lower holds_lower holds_upper")


class CoregMatrix(namedtuple("CoregMatrix", "b_e b_o b_eo rho")):
    """The 2×2 coregionalization matrix [[b_e, b_eo], [b_eo, b_o]]."""

    __slots__ = ()

    @property
    def matrix(self):
        return np.array([[self.b_e, self.b_eo], [self.b_eo, self.b_o]])

    @property
    def determinant(self):
        return self.b_e * self.b_o - self.b_eo ** 2


def coregionalization_matrix(rho):
    rho = _check_rho(rho)
    return CoregMatrix(1.0, 1.0, rho, rho)


def alpha_coefficients(rho):
    """Mixing weights of (u1, u2) for f^e (first row) and f^o (second row)."""
    rho = _check_rho(rho)
    return np.array([[1.0, 0.0], [rho, np.sqrt(1.0 - rho ** 2)]])


def coreg_from_alpha(alpha):
    """B = alpha·alphaᵀ for any 2×2 mixing matrix."""
    B = np.asarray(alpha, dtype=float).dot(np.asarray(alpha, dtype=float).T)
    scale = np.sqrt(B[0, 0] * B[1, 1])
    return CoregMatrix(B[0, 0], B[1, 1], B[0, 1], B[0, 1] / scale if scale > 0 else 0.0)


class IcmModel(object):
    """A fitted joint model of the experimental and observational surfaces of one arm."""

    def __init__(self, coreg, kernel, noise_variance, X_e, y_e, X_o, y_o, chol, alpha,
                 jitter=0.0):
        self.coreg = coreg
        self.kernel = kernel
        self.noise_variance = noise_variance
        self.X_e = X_e
        self.y_e = y_e
        self.X_o = X_o
        self.y_o = y_o
        self.chol = chol
        self.alpha = alpha
        self.jitter = jitter

    rho = property(lambda self: self.coreg.rho)
    n_e = property(lambda self: self.y_e.size)
    n_o = property(lambda self: self.y_o.size)

    @property
    def n(self):
        return self.n_e + self.n_o

    @property
    def y(self):
        return np.concatenate([self.y_e, self.y_o])

    def posterior(self, X_star, task="FE"):
        return icm_predict(self, X_star, task)

    def log_marginal_likelihood(self):
        return icm_log_marginal_likelihood(self)

    def summary(self):
        return {"rho": self.rho, "kernel": self.kernel.to_json(),
                "noise_variance": self.noise_variance, "lml": self.log_marginal_likelihood(),
                "n_e": self.n_e, "n_o": self.n_o}


class IcmContext(object):
    """The joint ICM likelihood at a fixed rho, as an objective for optimize_hyperparameters."""

    def __init__(self, De, Do, rho):
        self.X_e, self.y_e, self.X_o, self.y_o = _unpack(De, Do)
        self.rho = _check_rho(rho)

    def log_marginal_likelihood(self, kernel, noise_variance):
        model = icm_fit((self.X_e, self.y_e), (self.X_o, self.y_o), self.rho, kernel,
                        noise_variance)
        return icm_log_marginal_likelihood(model)

    def pooled(self):
        return np.vstack([self.X_e, self.X_o]), np.concatenate([self.y_e, self.y_o])


def icm_covariance(coreg, kernel, X_e, X_o):
    """Noise-free joint covariance of (f^e(X_e), f^o(X_o)), blockwise B ⊗ k."""
    X = np.vstack([X_e, X_o])
    n_e = X_e.shape[0]
    K = kernel_matrix(kernel, X)
    K[:n_e, :n_e] *= coreg.b_e
    K[:n_e, n_e:] *= coreg.b_eo
    K[n_e:, :n_e] *= coreg.b_eo
    K[n_e:, n_e:] *= coreg.b_o
    return K


def icm_fit(De, Do, rho, kernel, noise_variance):
    """Factorize Σ = K(X, X) + σ²I over both studies. Either study may be empty."""
    X_e, y_e, X_o, y_o = _unpack(De, Do, kernel.dim)
    coreg = coregionalization_matrix(rho)
    noise_variance = float(noise_variance)
    if not noise_variance > 0:
        raise ValidationError("Noise variance must be positive, got {0}.".format(noise_variance))
    n = y_e.size + y_o.size
    if n == 0:
        # No data: every posterior query returns the prior
        return IcmModel(coreg, kernel, noise_variance, X_e, y_e, X_o, y_o, np.zeros((0, 0)),
                        np.zeros(0))
    sigma = icm_covariance(coreg, kernel, X_e, X_o)
    sigma[np.diag_indices_from(sigma)] += noise_variance
    chol, jitter = cholesky_with_jitter(sigma)
    alpha = cho_solve((chol, True), np.concatenate([y_e, y_o]), check_finite=False)
    return IcmModel(coreg, kernel, noise_variance, X_e, y_e, X_o, y_o, chol, alpha, jitter)


def icm_predict(model, X_star, task="FE"):
    """Posterior means and variances of one task at every row of X_star."""
    weights, prior = _task_weights(model.coreg, task)
    X_star = as_matrix(X_star, model.kernel.dim)
    cross = _cross_covariance(model, X_star, weights)
    means = cross.T.dot(model.alpha)
    reduction = np.sum(_whiten(model, cross) ** 2, axis=0)
    variances = prior * model.kernel.variance - reduction
    return means, clamp_variances(variances)


def icm_posterior(model, x_star, task="FE"):
    """Posterior of f^e or f^o at a single point."""
    if task == "ETA":
        return icm_posterior_eta(model, x_star)
    means, variances = icm_predict(model, _point(model, x_star), task)
    return TaskPosterior(float(means[0]), float(variances[0]), task)


def icm_joint_posterior(model, x_star):
    """Posterior mean 2-vector and 2×2 covariance of (f^e(x*), f^o(x*))."""
    x_star = _point(model, x_star)
    cross = np.hstack([_cross_covariance(model, x_star, _task_weights(model.coreg, task)[0])
                       for task in ("FE", "FO")])
    mean = cross.T.dot(model.alpha)
    v = _whiten(model, cross)
    covariance = model.coreg.matrix * model.kernel.variance - v.T.dot(v)
    return mean, 0.5 * (covariance + covariance.T)


def icm_posterior_eta(model, x_star):
    """Posterior of the confounding function f^e - f^o at a single point."""
    mean, covariance = icm_joint_posterior(model, x_star)
    contrast = np.array([1.0, -1.0])
    variance = clamp_variances(np.array([contrast.dot(covariance).dot(contrast)]))[0]
    return TaskPosterior(float(mean[0] - mean[1]), float(variance), "ETA")


def icm_log_marginal_likelihood(model):
    if model.n == 0:
        return 0.0
    return (-0.5 * model.y.dot(model.alpha) - np.sum(np.log(np.diag(model.chol))) -
            0.5 * model.n * _LOG_2PI)


def variance_bound_report(De, Do, rho, kernel, noise_variance, X_star):
    """Check (1 - rho²)·V_rct ≤ V_full ≤ V_rct for the experimental surface at each point."""
    X_e, y_e, X_o, y_o = _unpack(De, Do, kernel.dim)
    full = icm_fit((X_e, y_e), (X_o, y_o), rho, kernel, noise_variance)
    rct_only = icm_fit((X_e, y_e), None, rho, kernel, noise_variance)
    _, v_full = icm_predict(full, X_star, "FE")
    _, v_rct = icm_predict(rct_only, X_star, "FE")
    lower = (1.0 - full.rho ** 2) * v_rct
    report = []
    for vf, vr, lo in zip(v_full, v_rct, lower):
        report.append(VarianceBound(float(vf), float(vr), float(lo),
                                    bool(vf >= lo - BOUND_TOL), bool(vf <= vr + BOUND_TOL)))
    violations = sum(1 for r in report if not (r.holds_lower and r.holds_upper))
    if violations:
        logger.warning("Variance bound violated at {0} of {1} points.".format(
            violations, len(report)))
    return report


def optimize_icm(De, Do, rho, family, restarts=DEFAULT_RESTARTS, seed=0):
    """Fit an arm with kernel and noise chosen by the joint LML at a fixed rho."""
    context = IcmContext(De, Do, rho)
    X, y = context.pooled()
    hyper = optimize_hyperparameters(X, y, family, rho_context=context, restarts=restarts,
                                     seed=seed)
    model = icm_fit((context.X_e, context.y_e), (context.X_o, context.y_o), rho,
                    hyper.kernel, hyper.noise_variance)
    return model, hyper


def _check_rho(rho):
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("rho must lie in [0, 1], got {0}.".format(rho))
    return rho


def _task_weights(coreg, task):
    """Block weights (on X_e, on X_o) of the cross-covariance and the prior weight."""
    if task == "FE":
        return (coreg.b_e, coreg.b_eo), coreg.b_e
    if task == "FO":
        return (coreg.b_eo, coreg.b_o), coreg.b_o
    if task == "ETA":
        return ((coreg.b_e - coreg.b_eo, coreg.b_eo - coreg.b_o),
                coreg.b_e + coreg.b_o - 2.0 * coreg.b_eo)
    raise UsageError("Unknown task '{0}'. Use one of {1}.".format(task, ", ".join(TASKS)))


def _cross_covariance(model, X_star, weights):
    """Training-by-test covariance between the observations and the target task."""
    return np.vstack([weights[0] * kernel_matrix(model.kernel, model.X_e, X_star),
                      weights[1] * kernel_matrix(model.kernel, model.X_o, X_star)])


def _whiten(model, cross):
    if model.n == 0:
        return np.zeros((0, cross.shape[1]))
    return solve_triangular(model.chol, cross, lower=True, check_finite=False)


def _point(model, x_star):
    return np.asarray(x_star, dtype=float).reshape(1, model.kernel.dim)


def _unpack(De, Do, dim=None):
    """Split (X, y) pairs into matrices; None or empty pairs become zero-row blocks."""
    if dim is None:
        for D in (De, Do):
            if D is not None and np.size(D[1]):
                dim = as_matrix(D[0]).shape[1]
                break
        else:
            raise UsageError("Need data in at least one study to infer the dimension.")
    blocks = []
    for D in (De, Do):
        if D is None or np.size(D[1]) == 0:
            blocks.extend([np.zeros((0, dim)), np.zeros(0)])
            continue
        X = as_matrix(D[0], dim)
        y = np.asarray(D[1], dtype=float).reshape(-1)
        if X.shape[0] != y.size:
            raise UsageError("Got {0} covariate rows but {1} outcomes.".format(X.shape[0],
                                                                               y.size))
        blocks.extend([X, y])
    return tuple(blocks)
