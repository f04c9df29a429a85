"""
History encoder.

Maps an admission prefix o_1..o_t to the encoded state

    c_t = [h_t || tanh(W_s static + b_s) || tanh(W_d diseases + b_d)]

where h_t is the LSTM hidden state after consuming the time-series
observations up to step t. Only time-series variables pass through the LSTM;
demographics and the disease multi-hot each get one dense tanh layer. With
``recurrent=False`` the LSTM is replaced by a dense tanh layer on the current
observation, giving the fully observed variant.

The encoding of step t never reads observations after t.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from core.exceptions import DimensionError
from core.kernels import (
    DenseCache,
    LstmCache,
    dense_backward,
    dense_forward,
    init_dense,
    init_lstm,
    lstm_cell_backward,
    lstm_cell_forward,
)
from core.params import ParamSet, copy_params, prefixed, unprefixed, zeros_like
from networks.architecture import Architecture

logger = logging.getLogger(__name__)


@dataclass
class InputNormalizer:
    """
    Fixed z-scoring of static and time-series inputs.

    Fitted once on the training split and stored with the checkpoint; it is
    not a trainable parameter and soft updates leave it alone.
    """

    static_mean: np.ndarray
    static_scale: np.ndarray
    series_mean: np.ndarray
    series_scale: np.ndarray

    @classmethod
    def identity(cls, static_dim: int, series_dim: int) -> 'InputNormalizer':
        return cls(
            static_mean=np.zeros(static_dim),
            static_scale=np.ones(static_dim),
            series_mean=np.zeros(series_dim),
            series_scale=np.ones(series_dim),
        )

    @classmethod
    def fit(cls, trajectories: Sequence) -> 'InputNormalizer':
        """Fit on the static rows and all observation rows of ``trajectories``."""
        if not trajectories:
            raise ValueError("cannot fit an input normalizer on zero trajectories")
        static_rows = np.stack([np.asarray(t.static, dtype=np.float64) for t in trajectories])
        series_rows = np.concatenate([np.asarray(t.observations, dtype=np.float64) for t in trajectories])

        static_dim = static_rows.shape[1]
        if static_dim:
            static_scaler = StandardScaler().fit(static_rows)
            static_mean, static_scale = static_scaler.mean_, static_scaler.scale_
        else:
            static_mean, static_scale = np.zeros(0), np.ones(0)
        series_scaler = StandardScaler().fit(series_rows)
        return cls(
            static_mean=np.asarray(static_mean, dtype=np.float64),
            static_scale=np.asarray(static_scale, dtype=np.float64),
            series_mean=np.asarray(series_scaler.mean_, dtype=np.float64),
            series_scale=np.asarray(series_scaler.scale_, dtype=np.float64),
        )

    def static(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.static_mean) / self.static_scale

    def series(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.series_mean) / self.series_scale

    def to_blocks(self) -> ParamSet:
        return {
            'static_mean': self.static_mean,
            'static_scale': self.static_scale,
            'series_mean': self.series_mean,
            'series_scale': self.series_scale,
        }

    @classmethod
    def from_blocks(cls, blocks: Mapping[str, np.ndarray]) -> 'InputNormalizer':
        return cls(**{name: np.asarray(blocks[name], dtype=np.float64) for name in (
            'static_mean', 'static_scale', 'series_mean', 'series_scale',
        )})


@dataclass
class EncoderCache:
    steps: int
    series_caches: List = field(default_factory=list)
    static_cache: Optional[DenseCache] = None
    disease_cache: Optional[DenseCache] = None


class HistoryEncoder:
    """
    Encoder parameters plus the forward and backward passes over one admission.

    Parameter blocks: ``lstm.W/b`` (or ``series.W/b`` when not recurrent),
    ``static.W/b`` and ``disease.W/b`` for the enabled branches.
    """

    def __init__(self, architecture: Architecture, params: Mapping[str, np.ndarray],
                 normalizer: Optional[InputNormalizer] = None):
        self.architecture = architecture
        self.params: ParamSet = dict(params)
        self.normalizer = normalizer or InputNormalizer.identity(
            architecture.static_dim, architecture.series_dim,
        )

    @classmethod
    def initialize(cls, architecture: Architecture, rng: np.random.Generator,
                   normalizer: Optional[InputNormalizer] = None) -> 'HistoryEncoder':
        arch = architecture
        params: ParamSet = {}
        if arch.recurrent:
            params.update(prefixed('lstm', init_lstm(arch.series_dim, arch.lstm_hidden, rng)))
        else:
            params.update(prefixed('series', init_dense(arch.series_dim, arch.lstm_hidden, rng)))
        if arch.has_static_branch:
            params.update(prefixed('static', init_dense(arch.static_dim, arch.static_hidden, rng)))
        if arch.has_disease_branch:
            params.update(prefixed('disease', init_dense(arch.disease_dim, arch.disease_hidden, rng)))
        return cls(arch, params, normalizer)

    @property
    def output_dim(self) -> int:
        return self.architecture.encoded_dim

    def with_params(self, params: Mapping[str, np.ndarray]) -> 'HistoryEncoder':
        return HistoryEncoder(self.architecture, params, self.normalizer)

    def copy(self) -> 'HistoryEncoder':
        return HistoryEncoder(self.architecture, copy_params(self.params), self.normalizer)

    def _check_inputs(self, trajectory) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        arch = self.architecture
        observations = np.asarray(trajectory.observations, dtype=np.float64)
        if observations.ndim != 2 or observations.shape[1] != arch.series_dim:
            raise DimensionError(
                f"observations shape {observations.shape} does not match series_dim {arch.series_dim}"
            )
        static = np.asarray(trajectory.static, dtype=np.float64).reshape(-1)
        if static.shape[0] != arch.static_dim:
            raise DimensionError(f"static vector has {static.shape[0]} entries, expected {arch.static_dim}")
        diseases = np.asarray(trajectory.diseases, dtype=np.float64).reshape(-1)
        if diseases.shape[0] != arch.disease_dim:
            raise DimensionError(f"disease vector has {diseases.shape[0]} entries, expected {arch.disease_dim}")
        return observations, static, diseases

    def encode(self, trajectory, up_to: Optional[int] = None) -> Tuple[np.ndarray, EncoderCache]:
        """
        Encode every prefix of ``trajectory`` up to step ``up_to``.

        Args:
            trajectory: object with ``observations`` (T, F), ``static`` (S,)
                and ``diseases`` (D,)
            up_to: last step to encode, 1 <= up_to <= T; defaults to T

        Returns:
            (C, cache) where row t-1 of C is c_t, shape (up_to, output_dim)
        """
        observations, static, diseases = self._check_inputs(trajectory)
        length = observations.shape[0]
        steps = length if up_to is None else int(up_to)
        if not 1 <= steps <= length:
            raise ValueError(f"step {up_to} out of range for a trajectory of length {length}")

        arch = self.architecture
        x = self.normalizer.series(observations[:steps])
        cache = EncoderCache(steps=steps)

        if arch.recurrent:
            lstm = unprefixed('lstm', self.params)
            h = np.zeros((1, arch.lstm_hidden))
            c = np.zeros((1, arch.lstm_hidden))
            hidden_rows = []
            for t in range(steps):
                h, c, step_cache = lstm_cell_forward(lstm, x[t], h, c)
                cache.series_caches.append(step_cache)
                hidden_rows.append(h[0])
            series_out = np.stack(hidden_rows)
        else:
            series_out, series_cache = dense_forward(unprefixed('series', self.params), x, 'tanh')
            cache.series_caches.append(series_cache)

        blocks = [series_out]
        if arch.has_static_branch:
            static_out, cache.static_cache = dense_forward(
                unprefixed('static', self.params), self.normalizer.static(static), 'tanh',
            )
            blocks.append(np.repeat(static_out, steps, axis=0))
        if arch.has_disease_branch:
            disease_out, cache.disease_cache = dense_forward(
                unprefixed('disease', self.params), diseases, 'tanh',
            )
            blocks.append(np.repeat(disease_out, steps, axis=0))
        return np.concatenate(blocks, axis=1), cache

    def encode_history(self, trajectory, up_to: int) -> np.ndarray:
        """c_t for a single step t (1-based)."""
        encoded, _ = self.encode(trajectory, up_to)
        return encoded[-1]

    def backward(self, cache: EncoderCache, d_encoded: np.ndarray) -> ParamSet:
        """Parameter gradients given dL/dC for every encoded row."""
        arch = self.architecture
        d_encoded = np.asarray(d_encoded, dtype=np.float64)
        if d_encoded.shape != (cache.steps, self.output_dim):
            raise DimensionError(
                f"encoder upstream gradient {d_encoded.shape} does not match "
                f"({cache.steps}, {self.output_dim})"
            )
        grads = zeros_like(self.params)
        offset = arch.lstm_hidden
        d_series = d_encoded[:, :offset]

        if arch.recurrent:
            dh_next = np.zeros((1, arch.lstm_hidden))
            dc_next = np.zeros((1, arch.lstm_hidden))
            for t in reversed(range(cache.steps)):
                step_cache: LstmCache = cache.series_caches[t]
                step = lstm_cell_backward(step_cache, d_series[t:t + 1] + dh_next, dc_next)
                grads['lstm.W'] += step.dW
                grads['lstm.b'] += step.db
                dh_next, dc_next = step.dh_prev, step.dc_prev
        else:
            step = dense_backward(cache.series_caches[0], d_series)
            grads['series.W'] += step.dW
            grads['series.b'] += step.db

        if arch.has_static_branch:
            width = arch.static_hidden
            d_static = d_encoded[:, offset:offset + width].sum(axis=0, keepdims=True)
            step = dense_backward(cache.static_cache, d_static)
            grads['static.W'] += step.dW
            grads['static.b'] += step.db
            offset += width
        if arch.has_disease_branch:
            width = arch.disease_hidden
            d_disease = d_encoded[:, offset:offset + width].sum(axis=0, keepdims=True)
            step = dense_backward(cache.disease_cache, d_disease)
            grads['disease.W'] += step.dW
            grads['disease.b'] += step.db
        return grads
