from causalicm.errors import UsageError, ValidationError
from causalicm.kernels import (FAMILIES, KernelSpec, eval_kernel, kernel_diag, kernel_matrix,
                               radial_profile)
import numpy as np
from numpy.testing import assert_allclose
import pytest


@pytest.mark.parametrize("family, expected", [
    ("rbf", np.exp(-0.5)),
    ("matern32", (1 + np.sqrt(3)) * np.exp(-np.sqrt(3))),
    ("matern52", (1 + np.sqrt(5) + 5.0 / 3.0) * np.exp(-np.sqrt(5))),
])
def test_unit_distance_values(family, expected):
    spec = KernelSpec(family, [1.0], 2.0)
    assert eval_kernel(spec, [0.0], [1.0]) == pytest.approx(2.0 * expected, rel=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_zero_distance_is_signal_variance(family):
    spec = KernelSpec(family, [0.7, 1.3], 1.7)
    assert spec([0.2, -0.4], [0.2, -0.4]) == pytest.approx(1.7)


def test_lengthscale_scales_distance():
    spec = KernelSpec("rbf", [2.0], 1.0)
    assert spec([0.0], [2.0]) == pytest.approx(np.exp(-0.5))


def test_ard_ignores_dimension_with_huge_lengthscale():
    spec = KernelSpec("matern52", [1.0, 1e8], 1.0)
    assert spec([0.0, 0.0], [0.5, 3.0]) == pytest.approx(spec([0.0, 0.0], [0.5, -3.0]))
    assert spec([0.0, 0.0], [0.5, 3.0]) == pytest.approx(
        KernelSpec("matern52", [1.0], 1.0)([0.0], [0.5]), rel=1e-10)


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_matrix_is_symmetric_psd(family):
    rng = np.random.default_rng(1)
    X = rng.uniform(-2, 2, size=(30, 3))
    K = kernel_matrix(KernelSpec(family, [0.5, 1.0, 2.0], 1.3), X)
    assert_allclose(K, K.T, atol=0)
    assert_allclose(np.diag(K), 1.3)
    assert np.linalg.eigvalsh(K).min() > -1e-10


def test_kernel_matrix_matches_pointwise_evaluation():
    rng = np.random.default_rng(2)
    X, X2 = rng.normal(size=(4, 2)), rng.normal(size=(3, 2))
    spec = KernelSpec("matern32", [0.8, 1.4], 0.9)
    K = kernel_matrix(spec, X, X2)
    expected = np.array([[eval_kernel(spec, x, x2) for x2 in X2] for x in X])
    assert_allclose(K, expected, rtol=1e-12)


def test_kernel_diag():
    spec = KernelSpec("rbf", [1.0, 1.0], 0.4)
    assert_allclose(kernel_diag(spec, np.zeros((5, 2))), 0.4)


def test_empty_inputs_give_empty_matrices():
    spec = KernelSpec("rbf", [1.0], 1.0)
    assert kernel_matrix(spec, np.zeros((0, 1)), np.ones((3, 1))).shape == (0, 3)


def test_dimension_mismatch():
    spec = KernelSpec("rbf", [1.0, 1.0], 1.0)
    with pytest.raises(UsageError):
        eval_kernel(spec, [0.0], [0.0, 1.0])
    with pytest.raises(UsageError):
        kernel_matrix(spec, np.zeros((2, 3)))


@pytest.mark.parametrize("args", [
    ("rbf", [0.0], 1.0),
    ("rbf", [-1.0], 1.0),
    ("rbf", [1.0], 0.0),
    ("rbf", [], 1.0),
    ("linear", [1.0], 1.0),
])
def test_invalid_specs(args):
    with pytest.raises(ValidationError):
        KernelSpec(*args)


def test_spec_is_read_only():
    spec = KernelSpec("rbf", [1.0, 2.0], 1.0)
    with pytest.raises(ValueError):
        spec.lengthscales[0] = 5.0


def test_log_params_and_json():
    spec = KernelSpec("matern52", [0.5, 3.0], 2.5)
    assert KernelSpec.from_log_params("matern52", spec.log_params()) == spec
    assert KernelSpec.from_json(spec.to_json()) == spec
    assert hash(KernelSpec.from_json(spec.to_json())) == hash(spec)


def test_matern_profiles_decay_slower_than_rbf_in_the_tail():
    r2 = np.array([9.0])
    assert radial_profile("matern32", r2) > radial_profile("matern52", r2) > \
        radial_profile("rbf", r2)
