"""
Critic network: Q(c, a) from the concatenation of encoded state and action.
"""
import logging
from dataclasses import dataclass
from typing import List, Mapping, Tuple

import numpy as np

from core.exceptions import DimensionError
from core.kernels import DenseCache, dense_backward, dense_forward, init_dense
from core.params import ParamSet, copy_params, prefixed, unprefixed, zeros_like
from networks.actor import layer_names
from networks.architecture import Architecture

logger = logging.getLogger(__name__)


@dataclass
class CriticCache:
    layers: List[DenseCache]
    encoded_dim: int


@dataclass
class CriticGradients:
    params: ParamSet
    d_encoded: np.ndarray
    d_actions: np.ndarray


class Critic:
    """Dense relu layers on ``[c || a]`` ending in one linear output unit."""

    def __init__(self, architecture: Architecture, params: Mapping[str, np.ndarray]):
        self.architecture = architecture
        self.params: ParamSet = dict(params)
        self.names = layer_names(architecture.critic_hidden)

    @classmethod
    def initialize(cls, architecture: Architecture, rng: np.random.Generator) -> 'Critic':
        sizes = [
            architecture.encoded_dim + architecture.n_medications,
            *architecture.critic_hidden,
            1,
        ]
        params: ParamSet = {}
        for name, fan_in, fan_out in zip(layer_names(architecture.critic_hidden), sizes[:-1], sizes[1:]):
            params.update(prefixed(name, init_dense(fan_in, fan_out, rng)))
        return cls(architecture, params)

    def with_params(self, params: Mapping[str, np.ndarray]) -> 'Critic':
        return Critic(self.architecture, params)

    def copy(self) -> 'Critic':
        return self.with_params(copy_params(self.params))

    def forward(self, encoded: np.ndarray, actions: np.ndarray) -> Tuple[np.ndarray, CriticCache]:
        """
        Args:
            encoded: (n, encoded_dim)
            actions: (n, K) probabilities or binary prescriptions

        Returns:
            (q, cache) with q of shape (n,)
        """
        encoded = np.atleast_2d(np.asarray(encoded, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        arch = self.architecture
        if encoded.shape[1] != arch.encoded_dim or actions.shape[1] != arch.n_medications:
            raise DimensionError(
                f"critic inputs {encoded.shape} and {actions.shape} do not match "
                f"encoded_dim {arch.encoded_dim} and K {arch.n_medications}"
            )
        if encoded.shape[0] != actions.shape[0]:
            raise DimensionError(f"critic got {encoded.shape[0]} states but {actions.shape[0]} actions")

        y = np.concatenate([encoded, actions], axis=1)
        caches = []
        for name in self.names:
            activation = 'identity' if name == 'out' else 'relu'
            y, layer_cache = dense_forward(unprefixed(name, self.params), y, activation)
            caches.append(layer_cache)
        return y[:, 0], CriticCache(layers=caches, encoded_dim=encoded.shape[1])

    def q_value(self, encoded: np.ndarray, actions: np.ndarray) -> np.ndarray:
        q, _ = self.forward(encoded, actions)
        return q

    def backward(self, cache: CriticCache, d_q: np.ndarray) -> CriticGradients:
        """Gradients of sum(d_q * q) with respect to parameters, states and actions."""
        upstream = np.asarray(d_q, dtype=np.float64).reshape(-1, 1)
        grads = zeros_like(self.params)
        for name, layer_cache in zip(reversed(self.names), reversed(cache.layers)):
            step = dense_backward(layer_cache, upstream)
            grads[f"{name}.W"] += step.dW
            grads[f"{name}.b"] += step.db
            upstream = step.dx
        return CriticGradients(
            params=grads,
            d_encoded=upstream[:, :cache.encoded_dim],
            d_actions=upstream[:, cache.encoded_dim:],
        )

    def action_gradient(self, encoded: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """Row-wise grad_a Q(c, a), shape (n, K)."""
        q, cache = self.forward(encoded, actions)
        return self.backward(cache, np.ones_like(q)).d_actions
