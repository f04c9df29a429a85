"""
Prescribers that can treat simulated patients.

Anything with ``prescribe(context, rng) -> (K,) 0/1 array`` can drive the
simulator: the oracle, the corrupted doctor, a uniform random policy and a
trained policy (``training.policy.TrainedPolicy``).
"""
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from cohort.models import PatientContext, PatientModel, oracle_action
from core.exceptions import ConfigurationError


class Prescriber(Protocol):
    def prescribe(self, context: PatientContext, rng: np.random.Generator) -> np.ndarray:
        ...


@dataclass(frozen=True)
class OraclePolicy:
    model: PatientModel

    def prescribe(self, context: PatientContext, rng: np.random.Generator) -> np.ndarray:
        return oracle_action(self.model, context.severity, context.growth)


@dataclass(frozen=True)
class DoctorPolicy:
    """
    The oracle with every medication bit independently replaced, with
    probability ``p_noise``, by a fair coin flip. p_noise = 0 is the oracle;
    p_noise = 1 ignores the patient entirely.
    """

    model: PatientModel
    p_noise: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.p_noise <= 1.0:
            raise ConfigurationError(f"p_noise must lie in [0, 1], got {self.p_noise}")

    def prescribe(self, context: PatientContext, rng: np.random.Generator) -> np.ndarray:
        oracle = oracle_action(self.model, context.severity, context.growth)
        # both draws happen every step so streams stay aligned across p_noise values
        corrupt = rng.random(self.model.n_medications) < self.p_noise
        coin = (rng.random(self.model.n_medications) < 0.5).astype(np.float64)
        return np.where(corrupt, coin, oracle)


@dataclass(frozen=True)
class RandomPolicy:
    n_medications: int
    p_select: float = 0.5

    def prescribe(self, context: PatientContext, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(self.n_medications) < self.p_select).astype(np.float64)
