"""
Trained policy: turns medication probabilities into prescriptions.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.exceptions import EmptyInputError
from networks.actor import PolicyNetwork
from networks.bundle import NetworkBundle
from networks.critic import Critic


def check_threshold(threshold: float) -> float:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"selection threshold must lie in (0, 1), got {threshold}")
    return float(threshold)


def select_medications(probabilities: np.ndarray, threshold: float) -> np.ndarray:
    """Medication k is selected iff its probability >= threshold."""
    return (np.asarray(probabilities) >= check_threshold(threshold)).astype(np.float64)


@dataclass
class TrainedPolicy:
    policy: PolicyNetwork
    critic: Critic
    threshold: float = 0.5

    def __post_init__(self):
        check_threshold(self.threshold)

    @classmethod
    def from_bundle(cls, bundle: NetworkBundle, threshold: float = 0.5) -> 'TrainedPolicy':
        return cls(policy=bundle.policy, critic=bundle.critic, threshold=threshold)

    @property
    def n_medications(self) -> int:
        return self.policy.architecture.n_medications

    def probabilities(self, trajectory, up_to: Optional[int] = None) -> np.ndarray:
        """mu(c_t) for every step of the prefix, shape (t, K)."""
        if up_to is not None and up_to < 1:
            raise EmptyInputError("cannot recommend for an empty history")
        actions, _ = self.policy.forward(trajectory, up_to)
        return actions

    def recommend(self, trajectory, up_to: Optional[int] = None, threshold: Optional[float] = None) -> np.ndarray:
        """Binary prescription for the last step of the prefix, shape (K,)."""
        return select_medications(self.probabilities(trajectory, up_to)[-1], threshold or self.threshold)

    def recommend_all(self, trajectory, threshold: Optional[float] = None) -> np.ndarray:
        """Binary prescriptions for every step, shape (T, K)."""
        return select_medications(self.probabilities(trajectory), threshold or self.threshold)

    def policy_q(self, trajectory) -> np.ndarray:
        """Q(c_t, mu(c_t)) for every step."""
        actions, cache = self.policy.forward(trajectory)
        return self.critic.q_value(cache.encoded, actions)

    def doctor_q(self, trajectory) -> np.ndarray:
        """Q(c_t, doctor action at t) for every step."""
        encoded, _ = self.policy.encoder.encode(trajectory)
        return self.critic.q_value(encoded, trajectory.actions)

    def prescribe(self, context, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Prescriber interface used by the cohort simulator; ``context`` carries the history so far."""
        return self.recommend(context)
