"""
Unit tests for kNN imputation.
"""
import unittest

import numpy as np

from core.exceptions import DataError, EmptyInputError
from data_pipeline.services.imputation import impute_knn


class TestImputeKnn(unittest.TestCase):

    def test_complete_matrix_unchanged(self):
        matrix = np.arange(12, dtype=float).reshape(4, 3)
        np.testing.assert_array_equal(impute_knn(matrix, k=3), matrix)

    def test_duplicate_row_is_copied_with_one_neighbour(self):
        matrix = np.array([
            [1.0, 2.0, 3.0],
            [5.0, 6.0, 7.0],
            [1.0, 2.0, np.nan],
        ])
        completed = impute_knn(matrix, k=1)
        self.assertAlmostEqual(completed[2, 2], 3.0)

    def test_mean_of_k_nearest(self):
        # row 2 is closest to rows 1 and 3 on the shared variable
        matrix = np.array([
            [0.0, 10.0],
            [1.5, 20.0],
            [2.0, np.nan],
            [3.0, 40.0],
            [10.0, 50.0],
        ])
        completed = impute_knn(matrix, k=2)
        self.assertAlmostEqual(completed[2, 1], 30.0)

    def test_observed_entries_untouched(self):
        rng = np.random.default_rng(3)
        matrix = rng.normal(size=(30, 4))
        mask = rng.random(matrix.shape) < 0.2
        mask[:, 0] = False
        matrix[mask] = np.nan
        completed = impute_knn(matrix, k=5)
        np.testing.assert_array_equal(completed[~mask], matrix[~mask])
        self.assertTrue(np.isfinite(completed).all())

    def test_imputed_values_stay_in_observed_range(self):
        rng = np.random.default_rng(4)
        matrix = rng.uniform(50, 150, size=(40, 3))
        matrix[::4, 2] = np.nan
        completed = impute_knn(matrix, k=4)
        observed = matrix[~np.isnan(matrix[:, 2]), 2]
        self.assertGreaterEqual(completed[::4, 2].min(), observed.min())
        self.assertLessEqual(completed[::4, 2].max(), observed.max())

    def test_variable_never_observed_raises(self):
        matrix = np.array([[1.0, np.nan], [2.0, np.nan]])
        with self.assertRaises(DataError) as context:
            impute_knn(matrix, k=1, variables=['hr', 'lactate'])
        self.assertIn('lactate', str(context.exception))

    def test_row_without_observations_raises(self):
        matrix = np.array([[1.0, 2.0], [np.nan, np.nan], [2.0, 3.0]])
        with self.assertRaises(EmptyInputError):
            impute_knn(matrix, k=1)

    def test_invalid_k(self):
        with self.assertRaises(ValueError):
            impute_knn(np.ones((2, 2)), k=0)


if __name__ == '__main__':
    unittest.main()
