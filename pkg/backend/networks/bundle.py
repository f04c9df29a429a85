"""
The four networks trained together: live policy and critic plus their targets.
"""
from dataclasses import dataclass
from typing import Optional

from core.rng import STREAM_INIT, RngState
from networks.actor import PolicyNetwork
from networks.architecture import Architecture
from networks.critic import Critic
from networks.encoder import InputNormalizer
from networks.targets import TargetPair


@dataclass
class NetworkBundle:
    architecture: Architecture
    policy: PolicyNetwork
    critic: Critic
    targets: TargetPair

    @classmethod
    def initialize(cls, architecture: Architecture, seed: int,
                   normalizer: Optional[InputNormalizer] = None) -> 'NetworkBundle':
        """Xavier-initialized live networks with exact target copies."""
        rng = RngState(seed).child(STREAM_INIT).generator()
        policy = PolicyNetwork.initialize(architecture, rng, normalizer)
        critic = Critic.initialize(architecture, rng)
        return cls(architecture, policy, critic, TargetPair.from_live(policy, critic))

    @property
    def normalizer(self) -> InputNormalizer:
        return self.policy.encoder.normalizer
