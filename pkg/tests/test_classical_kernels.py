import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ohcsvm.classical_kernels import (
    ClassicalKernelSpec,
    ClassicalKind,
    classical_kernel,
    gram_matrix,
)
from ohcsvm.errors import EmptyInputError, ParameterError, ShapeError
from ohcsvm.reports import write_gram_csv

RBF = ClassicalKernelSpec(ClassicalKind.RBF, gamma=1.0)


def test_rbf_self_similarity(rng):
    x = rng.normal(size=3)
    assert classical_kernel(ClassicalKernelSpec(gamma=3.7), x, x) == 1.0


def test_rbf_unit_distance():
    assert classical_kernel(RBF, [0, 0, 0], [1, 0, 0]) == pytest.approx(math.exp(-1))


def test_rbf_grid_search_gamma():
    spec = ClassicalKernelSpec(gamma=1.065)
    value = classical_kernel(spec, [0, 0, 0], [1, 1, 0])
    assert value == pytest.approx(0.118837, abs=1e-6)


def test_polynomial_and_sigmoid():
    x, x2 = np.array([1.0, 2.0]), np.array([0.5, -1.0])
    poly = ClassicalKernelSpec(ClassicalKind.POLYNOMIAL, gamma=0.5, c0=1.0, degree=3)
    sig = ClassicalKernelSpec(ClassicalKind.SIGMOID, gamma=0.5, c0=1.0)
    # x . x2 = -1.5
    assert classical_kernel(poly, x, x2) == pytest.approx(0.25 ** 3)
    assert classical_kernel(sig, x, x2) == pytest.approx(math.tanh(0.25))


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        classical_kernel(RBF, [0, 0], [0, 0, 0])


def test_spec_validation():
    with pytest.raises(ParameterError):
        ClassicalKernelSpec(gamma=0.0)
    with pytest.raises(ParameterError):
        ClassicalKernelSpec(ClassicalKind.POLYNOMIAL, degree=0)


@pytest.mark.parametrize("kind", list(ClassicalKind))
def test_symmetry(kind, rng):
    spec = ClassicalKernelSpec(kind, gamma=0.7, c0=0.3, degree=2)
    x, x2 = rng.normal(size=3), rng.normal(size=3)
    assert classical_kernel(spec, x, x2) == classical_kernel(spec, x2, x)


def test_rbf_translation_invariance(rng):
    x, x2, t = rng.normal(size=(3, 3))
    assert classical_kernel(RBF, x + t, x2 + t) == pytest.approx(classical_kernel(RBF, x, x2), abs=1e-12)


def test_gram_unit_diagonal_and_symmetry(rng):
    X = rng.uniform(-1, 1, size=(40, 3))
    K = np.asarray(gram_matrix(ClassicalKernelSpec(gamma=2.0), X))
    assert np.all(np.diag(K) == 1.0)
    assert np.array_equal(K, K.T)
    assert np.all((K > 0) & (K <= 1))


def test_gram_of_duplicates_is_all_ones():
    X = np.array([[0.2, -0.4, 0.1], [0.2, -0.4, 0.1]])
    assert_allclose(np.asarray(gram_matrix(RBF, X)), np.ones((2, 2)))


def test_gram_matches_scalar_kernel(rng):
    X = rng.normal(size=(3, 3))
    K = np.asarray(gram_matrix(RBF, X))
    expected = [[classical_kernel(RBF, a, b) for b in X] for a in X]
    assert_allclose(K, expected, rtol=1e-13, atol=1e-15)


def test_rectangular_block(rng):
    X, X2 = rng.normal(size=(4, 3)), rng.normal(size=(6, 3))
    block = gram_matrix(RBF, X, X2)
    assert block.shape == (4, 6)
    assert block.entries[1, 2] == pytest.approx(classical_kernel(RBF, X[1], X2[2]))


def test_rbf_gram_is_psd():
    gen = np.random.default_rng(2024)
    for _ in range(100):
        m = int(gen.integers(2, 51))
        X = gen.uniform(-1, 1, size=(m, 3))
        K = np.asarray(gram_matrix(ClassicalKernelSpec(gamma=float(gen.uniform(0.1, 5))), X))
        assert np.linalg.eigvalsh(K).min() >= -1e-8


def test_polynomial_gram_is_psd(rng):
    X = rng.uniform(-1, 1, size=(40, 3))
    spec = ClassicalKernelSpec(ClassicalKind.POLYNOMIAL, gamma=1.0, c0=1.0, degree=3)
    assert np.linalg.eigvalsh(np.asarray(gram_matrix(spec, X))).min() >= -1e-8


def test_empty_input():
    with pytest.raises(EmptyInputError):
        gram_matrix(RBF, np.empty((0, 3)))


def test_gram_carries_kernel_fingerprint(rng):
    spec = ClassicalKernelSpec(gamma=0.5)
    assert gram_matrix(spec, rng.normal(size=(2, 3))).kernel == spec.fingerprint
    assert spec.fingerprint != ClassicalKernelSpec(gamma=0.6).fingerprint


def test_serialisation_round_trip():
    spec = ClassicalKernelSpec(ClassicalKind.SIGMOID, gamma=0.25, c0=-1.0)
    assert ClassicalKernelSpec.from_dict(spec.to_dict()) == spec


def test_gram_csv_export(tmp_path, rng):
    K = np.asarray(gram_matrix(RBF, rng.normal(size=(3, 3))))
    file = write_gram_csv(K, tmp_path / "gram.csv")
    lines = file.read_text().splitlines()
    assert len(lines) == 4
