"""
Central finite-difference gradient checking.

Relative error per element is ``|a - n| / max(|a|, |n|, 1e-8)`` and the
check reports the maximum over all elements.
"""
import logging
from typing import Callable, Mapping

import numpy as np

from core.exceptions import NumericalError
from core.params import flatten, unflatten

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-8


def numerical_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, epsilon: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x`` (any shape)."""
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_grad = grad.reshape(-1)
    for idx in range(flat_x.size):
        original = flat_x[idx]
        flat_x[idx] = original + epsilon
        f_plus = float(f(x))
        flat_x[idx] = original - epsilon
        f_minus = float(f(x))
        flat_x[idx] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericalError(f"non-finite function value while perturbing element {idx}")
        flat_grad[idx] = (f_plus - f_minus) / (2.0 * epsilon)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    numeric = np.asarray(numeric, dtype=np.float64).reshape(-1)
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), DENOMINATOR_FLOOR)
    return float(np.max(np.abs(analytic - numeric) / denom))


def finite_diff_check(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    analytic_grad: np.ndarray,
    epsilon: float = 1e-5,
) -> float:
    """
    Compare an analytic gradient against central differences.

    Args:
        f: scalar function of a parameter array
        x: point at which to check
        analytic_grad: gradient of f at x, same shape as x
        epsilon: perturbation size in (0, 1e-2]

    Returns:
        Maximum element-wise relative error.

    Raises:
        ValueError: epsilon out of range
        NumericalError: f is non-finite at a perturbed point

    Example:
        >>> err = finite_diff_check(lambda v: float(v[0] ** 2), np.array([3.0]), np.array([6.0]))
        >>> err < 1e-8
        True
    """
    if not 0.0 < epsilon <= 1e-2:
        raise ValueError(f"epsilon must lie in (0, 1e-2], got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(f(x)):
        raise NumericalError("non-finite function value at the check point")
    numeric = numerical_gradient(f, x, epsilon)
    return max_relative_error(analytic_grad, numeric)


def check_param_gradients(
    loss: Callable[[Mapping[str, np.ndarray]], float],
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    epsilon: float = 1e-5,
) -> float:
    """finite_diff_check over every block of a parameter set at once."""
    x0 = flatten(params)
    return finite_diff_check(
        lambda v: loss(unflatten(v, params)),
        x0,
        flatten({name: grads[name] for name in params}),
        epsilon,
    )
