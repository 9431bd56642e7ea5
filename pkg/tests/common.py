import os
import unittest
from contextlib import contextmanager

import numpy as np
import scipy.sparse

TEST_REPO_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.realpath(__file__))), "test_repo")
MATRICES_PATH = os.path.join(TEST_REPO_PATH, "matrices")

# worked example of the Lp pattern rule (ratio 0.6, p 1)
EXAMPLE_3X4 = np.array(
    [
        [5.0, 4.0, 1.0, -5.0],
        [-5.0, 8.0, -7.0, 7.0],
        [0.0, 9.0, -7.0, -5.0],
    ]
)
EXAMPLE_3X4_PATTERN = np.array(
    [
        [1, 0, 0, 1],
        [1, 1, 1, 1],
        [0, 1, 1, 1],
    ]
)


def matrix_path(name):
    return os.path.join(MATRICES_PATH, name)


def dense(x):
    if scipy.sparse.issparse(x):
        return x.toarray()
    return np.asarray(x)


@contextmanager
def chdir(directory):
    original_dir = os.getcwd()
    try:
        os.chdir(directory)
        yield
    finally:
        os.chdir(original_dir)


class SparsifyCommon(unittest.TestCase):
    # pylint: disable=no-member
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.maxDiff = None

    def setUp(self):
        super().setUp()
        self.rng = np.random.default_rng(1234)

    def random_matrix(self, num_rows, num_cols, is_complex=False):
        res = self.rng.standard_normal((num_rows, num_cols))
        if is_complex:
            res = res + 1j * self.rng.standard_normal((num_rows, num_cols))
        return res

    def random_well_conditioned(self, size, is_complex=False):
        """Random square matrix shifted away from singularity"""
        return self.random_matrix(size, size, is_complex) + 2 * np.sqrt(size) * np.eye(size)

    def random_rank_deficient(self, num_rows, num_cols, rank, is_complex=False):
        return self.random_matrix(num_rows, rank, is_complex) @ self.random_matrix(rank, num_cols, is_complex)

    def random_structured(self, kind, size):
        base = self.random_matrix(size, size, is_complex=True)
        if kind == "hermitian":
            return base + base.conj().T
        if kind == "skew_hermitian":
            return base - base.conj().T
        if kind == "complex_symmetric":
            return base + base.T
        raise ValueError(kind)

    def assertFrobeniusClose(self, actual, expected, rtol, msg=None):
        # pylint:disable=invalid-name
        """||actual - expected||_F <= rtol * max(||expected||_F, 1)"""
        actual, expected = dense(actual), dense(expected)
        self.assertEqual(actual.shape, expected.shape, msg)
        diff = np.linalg.norm(actual - expected)
        scale = max(np.linalg.norm(expected), 1.0)
        self.assertLessEqual(diff, rtol * scale, msg or f"relative difference {diff / scale:.3e} > {rtol:.1e}")

    def assertFrobeniusSmall(self, value, scale, tol, msg=None):
        # pylint:disable=invalid-name
        norm = np.linalg.norm(dense(value))
        self.assertLessEqual(norm, tol * scale, msg or f"norm {norm:.3e} > {tol:.1e} * {scale:.3e}")
