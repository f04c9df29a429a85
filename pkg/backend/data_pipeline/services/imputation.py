"""
k-nearest-neighbour imputation.

Columns are z-scored first so no variable dominates the distance. The
distance between two rows is the Euclidean distance over the variables both
rows observe (rescaled for the number of shared variables), and a missing
entry becomes the mean of that variable over the k nearest rows that
observe it. Observed entries are returned untouched.
"""
import logging
from typing import Optional, Sequence

import numpy as np
from sklearn.impute import KNNImputer
from sklearn.preprocessing import StandardScaler

from core.exceptions import DataError, EmptyInputError

logger = logging.getLogger(__name__)


def impute_knn(matrix: np.ndarray, k: int = 10, variables: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Fill NaN entries of ``matrix`` (rows = samples, columns = variables).

    Args:
        matrix: (n, F) values with NaN for missing entries
        k: neighbours per missing entry, >= 1
        variables: column names used in error messages

    Raises:
        DataError: a variable is observed in no row
        EmptyInputError: a row observes no variable
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
    observed = ~np.isnan(matrix)
    if observed.all():
        return matrix.copy()

    names = list(variables) if variables is not None else [f"column {j}" for j in range(matrix.shape[1])]
    never = np.flatnonzero(~observed.any(axis=0))
    if never.size:
        raise DataError(f"cannot impute {names[never[0]]}: it is observed in no row")
    empty_rows = np.flatnonzero(~observed.any(axis=1))
    if empty_rows.size:
        raise EmptyInputError(f"row {empty_rows[0]} has no observed value to measure distances with")

    scaler = StandardScaler().fit(matrix)
    imputer = KNNImputer(n_neighbors=k, weights='uniform', metric='nan_euclidean')
    completed = scaler.inverse_transform(imputer.fit_transform(scaler.transform(matrix)))
    completed[observed] = matrix[observed]
    logger.debug(f"Imputed {int((~observed).sum())} of {matrix.size} entries with k={k}")
    return completed
