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

"""Stationary ARD covariance functions shared by every GP in the package."""

from causalicm.errors import UsageError, ValidationError
import numpy as np
from scipy.spatial.distance import cdist

FAMILIES = ("rbf", "matern32", "matern52")

_SQRT3 = np.sqrt(3.0)
_SQRT5 = np.sqrt(5.0)


class KernelSpec(object):
    """Kernel family, ARD lengthscales and signal variance. Immutable once built."""

    def __init__(self, family, lengthscales, variance):
        family = str(family).lower()
        if family not in FAMILIES:
            raise ValidationError("Unknown kernel family '{0}'. Use one of {1}.".format(
                family, ", ".join(FAMILIES)))
        lengthscales = np.array(lengthscales, dtype=float).reshape(-1)
        if lengthscales.size == 0:
            raise ValidationError("A kernel needs at least one lengthscale.")
        if not np.all(np.isfinite(lengthscales)) or np.any(lengthscales <= 0):
            raise ValidationError("Lengthscales must be positive, got {0}.".format(
                lengthscales.tolist()))
        variance = float(variance)
        if not np.isfinite(variance) or variance <= 0:
            raise ValidationError("Signal variance must be positive, got {0}.".format(variance))
        lengthscales.setflags(write=False)
        self._family = family
        self._lengthscales = lengthscales
        self._variance = variance

    family = property(lambda self: self._family)
    lengthscales = property(lambda self: self._lengthscales)
    variance = property(lambda self: self._variance)

    @property
    def dim(self):
        return self._lengthscales.size

    def __call__(self, x, x2):
        return eval_kernel(self, x, x2)

    def __eq__(self, other):
        return (isinstance(other, KernelSpec) and self.family == other.family and
                self.variance == other.variance and
                np.array_equal(self.lengthscales, other.lengthscales))

    def __hash__(self):
        return hash((self.family, self.variance, tuple(self.lengthscales)))

    def __repr__(self):
        return "KernelSpec({0}, lengthscales={1}, variance={2:.6g})".format(
            self.family, np.round(self.lengthscales, 6).tolist(), self.variance)

    def log_params(self):
        """Log-space vector [log lengthscales..., log variance] used by the optimizer."""
        return np.append(np.log(self.lengthscales), np.log(self.variance))

    @classmethod
    def from_log_params(cls, family, theta):
        theta = np.asarray(theta, dtype=float)
        return cls(family, np.exp(theta[:-1]), np.exp(theta[-1]))

    def to_json(self):
        return {"family": self.family, "lengthscales": self.lengthscales.tolist(),
                "variance": self.variance}

    @classmethod
    def from_json(cls, blob):
        try:
            return cls(blob["family"], blob["lengthscales"], blob["variance"])
        except (KeyError, TypeError):
            raise ValidationError("A kernel needs 'family', 'lengthscales' and 'variance'.")


def radial_profile(family, r2):
    """g(r) for each family, given squared scaled distances. Square roots only for Matern."""
    if family == "rbf":
        return np.exp(-0.5 * r2)
    r = np.sqrt(np.maximum(r2, 0.0))
    if family == "matern32":
        return (1.0 + _SQRT3 * r) * np.exp(-_SQRT3 * r)
    if family == "matern52":
        return (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)
    raise ValidationError("Unknown kernel family '{0}'.".format(family))


def scaled_sq_dist(spec, X, X2):
    """Squared Euclidean distances after dividing each column by its lengthscale."""
    X = _as_matrix(spec, X)
    X2 = _as_matrix(spec, X2)
    if X.shape[0] == 0 or X2.shape[0] == 0:
        return np.zeros((X.shape[0], X2.shape[0]))
    return cdist(X / spec.lengthscales, X2 / spec.lengthscales, "sqeuclidean")


def eval_kernel(spec, x, x2):
    """Covariance between two single points."""
    x = np.asarray(x, dtype=float).reshape(-1)
    x2 = np.asarray(x2, dtype=float).reshape(-1)
    if x.size != spec.dim or x2.size != spec.dim:
        raise UsageError("Points have dimensions {0} and {1}; the kernel expects {2}.".format(
            x.size, x2.size, spec.dim))
    diff = (x - x2) / spec.lengthscales
    return float(spec.variance * radial_profile(spec.family, np.dot(diff, diff)))


def kernel_matrix(spec, X, X2=None):
    """Covariance (cross-)matrix between the rows of X and X2. X2 defaults to X."""
    symmetric = X2 is None
    if symmetric:
        X2 = X
    K = spec.variance * radial_profile(spec.family, scaled_sq_dist(spec, X, X2))
    if symmetric:
        # cdist leaves tiny asymmetries and non-zero self distances in floating point
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, spec.variance)
    return K


def kernel_diag(spec, X):
    """k(x, x) for every row; always the signal variance for stationary kernels."""
    return np.full(_as_matrix(spec, X).shape[0], spec.variance)


def _as_matrix(spec, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size % spec.dim == 0:
        X = X.reshape(-1, spec.dim)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise UsageError("Covariates have shape {0}; the kernel expects {1} columns.".format(
            X.shape, spec.dim))
    return X
