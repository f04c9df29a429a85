"""
Actor network.

The policy parameters cover the history encoder plus a dense head
(relu hidden layers, then one sigmoid per medication). Output probabilities
are clamped to [PROBABILITY_FLOOR, 1 - PROBABILITY_FLOOR]; clamped entries
pass no gradient.
"""
import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple

import numpy as np

from core.exceptions import DimensionError
from core.kernels import DenseCache, dense_backward, dense_forward, init_dense
from core.params import ParamSet, copy_params, prefixed, unprefixed, zeros_like
from networks.architecture import Architecture
from networks.encoder import EncoderCache, HistoryEncoder, InputNormalizer

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-6


def layer_names(hidden: Tuple[int, ...]) -> List[str]:
    return [f"fc{i + 1}" for i in range(len(hidden))] + ['out']


@dataclass
class HeadCache:
    layers: List[DenseCache]
    raw: np.ndarray


class ActorHead:
    """Dense head mapping encoded states to K medication probabilities."""

    def __init__(self, architecture: Architecture, params: Mapping[str, np.ndarray]):
        self.architecture = architecture
        self.params: ParamSet = dict(params)
        self.names = layer_names(architecture.actor_hidden)

    @classmethod
    def initialize(cls, architecture: Architecture, rng: np.random.Generator) -> 'ActorHead':
        sizes = [architecture.encoded_dim, *architecture.actor_hidden, architecture.n_medications]
        params: ParamSet = {}
        for name, fan_in, fan_out in zip(layer_names(architecture.actor_hidden), sizes[:-1], sizes[1:]):
            params.update(prefixed(name, init_dense(fan_in, fan_out, rng)))
        return cls(architecture, params)

    def forward(self, encoded: np.ndarray) -> Tuple[np.ndarray, HeadCache]:
        """
        Args:
            encoded: (n, encoded_dim) encoded states

        Returns:
            (A, cache) with A of shape (n, K), every entry in [1e-6, 1 - 1e-6]
        """
        encoded = np.asarray(encoded, dtype=np.float64)
        if encoded.ndim == 1:
            encoded = encoded[np.newaxis, :]
        if encoded.shape[1] != self.architecture.encoded_dim:
            raise DimensionError(
                f"actor input has {encoded.shape[1]} features, expected {self.architecture.encoded_dim}"
            )
        caches = []
        y = encoded
        for name in self.names:
            activation = 'sigmoid' if name == 'out' else 'relu'
            y, layer_cache = dense_forward(unprefixed(name, self.params), y, activation)
            caches.append(layer_cache)
        return np.clip(y, PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR), HeadCache(layers=caches, raw=y)

    def backward(self, cache: HeadCache, d_actions: np.ndarray) -> Tuple[ParamSet, np.ndarray]:
        """Returns (parameter gradients, dL/d encoded)."""
        d_actions = np.asarray(d_actions, dtype=np.float64)
        if d_actions.shape != cache.raw.shape:
            raise DimensionError(
                f"actor upstream gradient {d_actions.shape} does not match output {cache.raw.shape}"
            )
        inside = (cache.raw >= PROBABILITY_FLOOR) & (cache.raw <= 1.0 - PROBABILITY_FLOOR)
        upstream = d_actions * inside
        grads = zeros_like(self.params)
        for name, layer_cache in zip(reversed(self.names), reversed(cache.layers)):
            step = dense_backward(layer_cache, upstream)
            grads[f"{name}.W"] += step.dW
            grads[f"{name}.b"] += step.db
            upstream = step.dx
        return grads, upstream


@dataclass
class PolicyCache:
    encoder: EncoderCache
    head: HeadCache
    encoded: np.ndarray


class PolicyNetwork:
    """
    Encoder plus actor head: the full policy parameter set.

    Blocks are prefixed ``encoder.`` and ``actor.``.
    """

    def __init__(self, encoder: HistoryEncoder, head: ActorHead):
        self.encoder = encoder
        self.head = head

    @classmethod
    def initialize(cls, architecture: Architecture, rng: np.random.Generator,
                   normalizer: Optional[InputNormalizer] = None) -> 'PolicyNetwork':
        encoder = HistoryEncoder.initialize(architecture, rng, normalizer)
        return cls(encoder, ActorHead.initialize(architecture, rng))

    @property
    def architecture(self) -> Architecture:
        return self.encoder.architecture

    @property
    def params(self) -> ParamSet:
        return {**prefixed('encoder', self.encoder.params), **prefixed('actor', self.head.params)}

    def with_params(self, params: Mapping[str, np.ndarray]) -> 'PolicyNetwork':
        return PolicyNetwork(
            self.encoder.with_params(unprefixed('encoder', params)),
            ActorHead(self.architecture, unprefixed('actor', params)),
        )

    def copy(self) -> 'PolicyNetwork':
        return self.with_params(copy_params(self.params))

    def forward(self, trajectory, up_to: Optional[int] = None) -> Tuple[np.ndarray, PolicyCache]:
        """
        Action probabilities for every step of the (prefix of the) admission.

        Returns:
            (A, cache) where row t-1 of A is mu(c_t)
        """
        encoded, encoder_cache = self.encoder.encode(trajectory, up_to)
        actions, head_cache = self.head.forward(encoded)
        return actions, PolicyCache(encoder=encoder_cache, head=head_cache, encoded=encoded)

    def act(self, encoded: np.ndarray) -> np.ndarray:
        """Actions for already encoded states."""
        actions, _ = self.head.forward(encoded)
        return actions

    def backward(self, cache: PolicyCache, d_actions: np.ndarray) -> ParamSet:
        """Gradient of sum(d_actions * A) with respect to every policy parameter."""
        head_grads, d_encoded = self.head.backward(cache.head, d_actions)
        encoder_grads = self.encoder.backward(cache.encoder, d_encoded)
        return {**prefixed('encoder', encoder_grads), **prefixed('actor', head_grads)}
