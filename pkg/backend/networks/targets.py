"""
Target networks and soft updates.
"""
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from core.exceptions import ConfigurationError
from core.params import ParamSet, check_congruent
from networks.actor import PolicyNetwork
from networks.critic import Critic


def soft_update(live: Mapping[str, np.ndarray], target: Mapping[str, np.ndarray], tau: float) -> ParamSet:
    """
    Return ``tau * live + (1 - tau) * target`` block by block.

    >>> soft_update({'w': np.array([1.0])}, {'w': np.array([0.0])}, 0.001)['w']
    array([0.001])
    """
    if not 0.0 < tau <= 1.0:
        raise ConfigurationError(f"tau must lie in (0, 1], got {tau}")
    check_congruent(live, target, 'live and target parameters')
    if tau == 1.0:
        return {name: np.array(value, dtype=np.float64, copy=True) for name, value in live.items()}
    return {name: tau * live[name] + (1.0 - tau) * target[name] for name in live}


@dataclass
class TargetPair:
    """Slowly tracking copies of the policy (encoder included) and the critic."""

    policy: PolicyNetwork
    critic: Critic

    @classmethod
    def from_live(cls, policy: PolicyNetwork, critic: Critic) -> 'TargetPair':
        return cls(policy=policy.copy(), critic=critic.copy())

    def update_critic(self, live: Critic, tau: float) -> 'TargetPair':
        return TargetPair(self.policy, self.critic.with_params(soft_update(live.params, self.critic.params, tau)))

    def update_policy(self, live: PolicyNetwork, tau: float) -> 'TargetPair':
        return TargetPair(self.policy.with_params(soft_update(live.params, self.policy.params, tau)), self.critic)
