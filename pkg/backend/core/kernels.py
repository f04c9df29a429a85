"""
Dense numerical kernel: matrix product, dense layers and the LSTM cell.

Every forward op returns its output together with a cache, and every
backward op consumes that cache and returns exact analytic gradients.
Conventions:

- float64 everywhere
- activations are row-major batches, shape (n, features)
- dense weights are (out, in) so a layer computes ``y = act(x @ W.T + b)``
- LSTM weights are (4H, I + H) with gate blocks ordered input, forget,
  output, candidate
"""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import DimensionError, NumericalError

logger = logging.getLogger(__name__)

ACTIVATIONS = ('sigmoid', 'tanh', 'relu', 'identity')


def as_matrix(x, name: str = 'x') -> np.ndarray:
    """Coerce a vector or matrix to a 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    return arr


def ensure_finite(arr: np.ndarray, name: str) -> np.ndarray:
    """Raise NumericalError if ``arr`` holds NaN or Inf."""
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {name}")
    return arr


def matmul(a, b) -> np.ndarray:
    """Matrix product with a shape check that names both operands."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return ensure_finite(a @ b, 'matmul result')


def activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == 'sigmoid':
        return expit(z)
    if activation == 'tanh':
        return np.tanh(z)
    if activation == 'relu':
        return np.maximum(z, 0.0)
    if activation == 'identity':
        return z
    raise ValueError(f"unknown activation '{activation}', expected one of {ACTIVATIONS}")


def activation_grad(z: np.ndarray, y: np.ndarray, activation: str) -> np.ndarray:
    """Derivative of the activation, evaluated from cached pre/post-activations."""
    if activation == 'sigmoid':
        return y * (1.0 - y)
    if activation == 'tanh':
        return 1.0 - y * y
    if activation == 'relu':
        return (z > 0.0).astype(np.float64)
    if activation == 'identity':
        return np.ones_like(z)
    raise ValueError(f"unknown activation '{activation}', expected one of {ACTIVATIONS}")


def xavier_uniform(fan_out: int, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Weights drawn from U(-b, b) with b = sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def init_dense(fan_in: int, fan_out: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    return {
        'W': xavier_uniform(fan_out, fan_in, rng),
        'b': np.zeros(fan_out),
    }


def init_lstm(input_size: int, hidden_size: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    return {
        'W': xavier_uniform(4 * hidden_size, input_size + hidden_size, rng),
        'b': np.zeros(4 * hidden_size),
    }


# ---------------------------------------------------------------------------
# Dense layer
# ---------------------------------------------------------------------------

@dataclass
class DenseCache:
    x: np.ndarray
    W: np.ndarray
    z: np.ndarray
    y: np.ndarray
    activation: str


@dataclass
class DenseGradients:
    dW: np.ndarray
    db: np.ndarray
    dx: np.ndarray


def dense_forward(
    params: Mapping[str, np.ndarray],
    x,
    activation: str = 'identity',
) -> Tuple[np.ndarray, DenseCache]:
    """
    Forward pass of ``y = act(x @ W.T + b)``.

    Args:
        params: {'W': (out, in), 'b': (out,)}
        x: input batch (n, in) or a single vector (in,)
        activation: sigmoid | tanh | relu | identity

    Returns:
        (y, cache) where y has shape (n, out)
    """
    W = np.asarray(params['W'], dtype=np.float64)
    b = np.asarray(params['b'], dtype=np.float64).reshape(-1)
    x = as_matrix(x)
    if W.ndim != 2 or x.shape[1] != W.shape[1] or b.shape[0] != W.shape[0]:
        raise DimensionError(
            f"dense shape mismatch: x {x.shape}, W {W.shape}, b {b.shape}"
        )
    z = x @ W.T + b
    y = ensure_finite(activate(z, activation), 'dense output')
    return y, DenseCache(x=x, W=W, z=z, y=y, activation=activation)


def dense_backward(cache: DenseCache, upstream_grad) -> DenseGradients:
    """Gradients of a dense layer given dL/dy."""
    dy = as_matrix(upstream_grad, 'upstream_grad')
    if dy.shape != cache.y.shape:
        raise DimensionError(
            f"upstream gradient shape {dy.shape} does not match layer output {cache.y.shape}"
        )
    dz = dy * activation_grad(cache.z, cache.y, cache.activation)
    return DenseGradients(
        dW=dz.T @ cache.x,
        db=dz.sum(axis=0),
        dx=dz @ cache.W,
    )


# ---------------------------------------------------------------------------
# LSTM cell
# ---------------------------------------------------------------------------

@dataclass
class LstmCache:
    xh: np.ndarray
    W: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray
    input_size: int


@dataclass
class LstmGradients:
    dW: np.ndarray
    db: np.ndarray
    dx: np.ndarray
    dh_prev: np.ndarray
    dc_prev: np.ndarray


def lstm_cell_forward(
    params: Mapping[str, np.ndarray],
    x_t,
    h_prev,
    c_prev,
) -> Tuple[np.ndarray, np.ndarray, LstmCache]:
    """
    One step of a standard LSTM cell.

    With all parameters zero every gate is 0.5 and the candidate is 0, so
    ``c_t = 0.5 * c_prev`` and ``h_t = 0.5 * tanh(c_t)``.

    Returns:
        (h_t, c_t, cache)
    """
    W = np.asarray(params['W'], dtype=np.float64)
    b = np.asarray(params['b'], dtype=np.float64).reshape(-1)
    x_t = as_matrix(x_t, 'x_t')
    h_prev = as_matrix(h_prev, 'h_prev')
    c_prev = as_matrix(c_prev, 'c_prev')

    hidden = h_prev.shape[1]
    if (
        W.shape != (4 * hidden, x_t.shape[1] + hidden)
        or b.shape[0] != 4 * hidden
        or c_prev.shape != h_prev.shape
        or x_t.shape[0] != h_prev.shape[0]
    ):
        raise DimensionError(
            f"lstm shape mismatch: x {x_t.shape}, h {h_prev.shape}, c {c_prev.shape}, "
            f"W {W.shape}, b {b.shape}"
        )

    xh = np.concatenate([x_t, h_prev], axis=1)
    z = xh @ W.T + b
    i = expit(z[:, :hidden])
    f = expit(z[:, hidden:2 * hidden])
    o = expit(z[:, 2 * hidden:3 * hidden])
    g = np.tanh(z[:, 3 * hidden:])

    c_t = f * c_prev + i * g
    tanh_c = np.tanh(c_t)
    h_t = o * tanh_c

    ensure_finite(h_t, 'lstm hidden state')
    ensure_finite(c_t, 'lstm cell state')
    cache = LstmCache(
        xh=xh, W=W, c_prev=c_prev, i=i, f=f, o=o, g=g, tanh_c=tanh_c,
        input_size=x_t.shape[1],
    )
    return h_t, c_t, cache


def lstm_cell_backward(cache: LstmCache, dh, dc) -> LstmGradients:
    """
    Backward pass of one LSTM step.

    Args:
        cache: from the matching lstm_cell_forward
        dh: dL/dh_t (total, including the contribution from step t+1)
        dc: dL/dc_t arriving from step t+1 (zeros at the last step)
    """
    dh = as_matrix(dh, 'dh')
    dc = as_matrix(dc, 'dc')
    if dh.shape != cache.o.shape or dc.shape != cache.o.shape:
        raise DimensionError(
            f"lstm upstream shapes dh {dh.shape}, dc {dc.shape} do not match state {cache.o.shape}"
        )

    dc_total = dc + dh * cache.o * (1.0 - cache.tanh_c ** 2)
    do = dh * cache.tanh_c
    di = dc_total * cache.g
    dg = dc_total * cache.i
    df = dc_total * cache.c_prev

    dz = np.concatenate([
        di * cache.i * (1.0 - cache.i),
        df * cache.f * (1.0 - cache.f),
        do * cache.o * (1.0 - cache.o),
        dg * (1.0 - cache.g ** 2),
    ], axis=1)

    dxh = dz @ cache.W
    return LstmGradients(
        dW=dz.T @ cache.xh,
        db=dz.sum(axis=0),
        dx=dxh[:, :cache.input_size],
        dh_prev=dxh[:, cache.input_size:],
        dc_prev=dc_total * cache.f,
    )
