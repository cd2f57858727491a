"""Builders shared by the test modules."""

from causalicm.gp import Hyperparameters
from causalicm.icm import alpha_coefficients
from causalicm.kernels import KernelSpec, kernel_matrix
from causalicm.simgen import Dataset
import numpy as np


def random_kernel(rng, dim, family=None):
    family = family or rng.choice(["rbf", "matern32", "matern52"])
    return KernelSpec(family, rng.uniform(0.3, 2.0, size=dim), rng.uniform(0.5, 2.0))


def random_blocks(rng, dim, n_e, n_o):
    De = (rng.uniform(-2, 2, size=(n_e, dim)), rng.normal(size=n_e))
    Do = (rng.uniform(-2, 2, size=(n_o, dim)), rng.normal(size=n_o))
    return De, Do


def frozen_hyperparameters(dim=1, family="rbf"):
    hyper = Hyperparameters(KernelSpec(family, [1.2] * dim, 1.5), 0.3, np.nan, np.nan)
    return {0: hyper, 1: hyper._replace(kernel=KernelSpec(family, [0.8] * dim, 2.0))}


def toy_dataset(study, n_per_arm=6, dim=1, seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(2 * n_per_arm, dim))
    a = np.repeat([0, 1], n_per_arm)
    y = X.sum(axis=1) + a * (1.0 + shift) + 0.1 * rng.normal(size=2 * n_per_arm)
    return Dataset(X, y, a, study)


def dense_oracle(De, Do, rho, kernel, noise, x_star):
    """Condition the joint Gaussian of two independent latent GPs mixed by alpha."""
    X = np.vstack([De[0], Do[0], x_star.reshape(1, -1)])
    n_e, n_o = len(De[1]), len(Do[1])
    K = kernel_matrix(kernel, X)
    latent = np.block([[K, np.zeros_like(K)], [np.zeros_like(K), K]])
    a = alpha_coefficients(rho)
    m = X.shape[0]
    rows = []
    for i in range(m):
        task = 0 if i < n_e or i == m - 1 else 1
        row = np.zeros(2 * m)
        row[i], row[m + i] = a[task]
        rows.append(row)
    # one more row for f^o at x_star
    row = np.zeros(2 * m)
    row[m - 1], row[2 * m - 1] = a[1]
    rows.append(row)
    A = np.array(rows)
    cov = A.dot(latent).dot(A.T)
    n = n_e + n_o
    cov[:n, :n] += noise * np.eye(n)
    y = np.concatenate([De[1], Do[1]])
    cross = cov[:n, n:]
    mean = cross.T.dot(np.linalg.solve(cov[:n, :n], y))
    post = cov[n:, n:] - cross.T.dot(np.linalg.solve(cov[:n, :n], cross))
    contrast = np.array([1.0, -1.0])
    return {"FE": (mean[0], post[0, 0]), "FO": (mean[1], post[1, 1]),
            "ETA": (contrast.dot(mean), contrast.dot(post).dot(contrast))}
