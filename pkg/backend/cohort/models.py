"""
Synthetic patient model.

Each admission has a hidden severity vector s in R^d. Medication k acts on
latent dimension ``k mod d`` with sign ``-`` when ``(k // d)`` is even and
``+`` when odd; medications with id >= ``strong_from`` act at twice the base
magnitude. Severity evolves as

    s_{t+1} = (1 + g) s_t + E^T a_t + w_t,     w_t ~ N(0, process_noise^2 I)

where g is the patient's growth rate (older patients deteriorate faster).
The clinician sees o_t = s_t + v_t with v_t ~ N(0, observation_noise^2 I).
After the last step the patient survives with probability
``sigmoid((survival_threshold - rms(s_{T+1})) / survival_temperature)``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import ConfigurationError
from data_pipeline.schemas import DatasetManifest
from data_pipeline.trajectories import Trajectory

STATIC_FIELDS = ('age', 'gender', 'weight', 'height')
MIN_AGE, MAX_AGE = 18.0, 90.0
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PatientModel:
    latent_dim: int = 6
    n_medications: int = 20
    growth: float = 0.05
    process_noise: float = 0.1
    observation_noise: float = 0.3
    initial_severity: float = 1.0
    effect_magnitude: float = 0.5
    strong_from: int = 12
    min_length: int = 3
    max_length: int = 10
    survival_threshold: float = 0.7
    survival_temperature: float = 0.05
    disease_threshold: float = 0.5
    reward_survived: float = 15.0
    reward_died: float = -15.0

    def __post_init__(self):
        problems = []
        if self.latent_dim < 1:
            problems.append(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.n_medications < 1:
            problems.append(f"n_medications must be >= 1, got {self.n_medications}")
        if not 1 <= self.min_length <= self.max_length:
            problems.append(f"episode lengths need 1 <= min_length <= max_length, got [{self.min_length}, {self.max_length}]")
        for name in ('process_noise', 'observation_noise', 'initial_severity', 'growth'):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.effect_magnitude <= 0:
            problems.append(f"effect_magnitude must be > 0, got {self.effect_magnitude}")
        if self.survival_temperature <= 0:
            problems.append(f"survival_temperature must be > 0, got {self.survival_temperature}")
        if problems:
            raise ConfigurationError('; '.join(problems))

    @cached_property
    def effect_matrix(self) -> np.ndarray:
        """E with shape (K, d): row k is the severity change caused by medication k."""
        effects = np.zeros((self.n_medications, self.latent_dim))
        for k in range(self.n_medications):
            sign = -1.0 if (k // self.latent_dim) % 2 == 0 else 1.0
            magnitude = self.effect_magnitude * (2.0 if k >= self.strong_from else 1.0)
            effects[k, k % self.latent_dim] = sign * magnitude
        return effects

    @cached_property
    def medications_by_dimension(self) -> List[Tuple[int, ...]]:
        return [
            tuple(k for k in range(self.n_medications) if k % self.latent_dim == j)
            for j in range(self.latent_dim)
        ]

    @cached_property
    def effect_classes(self) -> List[Tuple[Tuple[int, ...], ...]]:
        """
        Per dimension: ids of (base down, base up, strong down, strong up)
        medications, each in ascending order.
        """
        classes = []
        for medications in self.medications_by_dimension:
            effects = [(k, (k // self.latent_dim) % 2 == 1, k >= self.strong_from) for k in medications]
            classes.append(tuple(
                tuple(k for k, up, strong in effects if up == want_up and strong == want_strong)
                for want_strong in (False, True) for want_up in (False, True)
            ))
        return classes

    @property
    def n_diseases(self) -> int:
        return 2 * self.latent_dim

    @property
    def static_fields(self) -> Tuple[str, ...]:
        return STATIC_FIELDS

    @property
    def series_fields(self) -> List[str]:
        return [f"marker_{j}" for j in range(self.latent_dim)]

    def patient_growth(self, age: float) -> float:
        """Growth rate scales from 1x at age 18 to 2x at age 90."""
        return self.growth * (1.0 + (age - MIN_AGE) / (MAX_AGE - MIN_AGE))

    def step(self, severity: np.ndarray, growth: float, action: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return (1.0 + growth) * severity + action @ self.effect_matrix + noise

    def survival_probability(self, severity: np.ndarray) -> float:
        rms = float(np.sqrt(np.mean(np.square(severity))))
        return float(expit((self.survival_threshold - rms) / self.survival_temperature))

    def diseases_for(self, severity: np.ndarray) -> np.ndarray:
        """Disease 2j marks a high initial severity on dimension j, disease 2j+1 a low one."""
        diseases = np.zeros(self.n_diseases)
        diseases[0::2] = severity > self.disease_threshold
        diseases[1::2] = severity < -self.disease_threshold
        return diseases

    def manifest(self) -> DatasetManifest:
        return DatasetManifest(
            n_medications=self.n_medications,
            n_diseases=self.n_diseases,
            static_fields=list(STATIC_FIELDS),
            series_fields=self.series_fields,
            medication_vocab=[f"med_{k:02d}" for k in range(self.n_medications)],
            disease_vocab=[
                f"dx_{j}_{'high' if i == 0 else 'low'}" for j in range(self.latent_dim) for i in range(2)
            ],
            source='cohort',
        )


def oracle_action(model: PatientModel, severity: np.ndarray, growth: Optional[float] = None) -> np.ndarray:
    """
    Ground-truth prescription.

    For every latent dimension, pick the smallest set of the medications
    acting on it that minimizes the magnitude of the expected next severity
    ``|(1 + g) s_j + sum of effects|``. Ties go to fewer medications, then to
    lower medication ids.

    Every effect on a dimension is one of -m, +m, -2m or +2m, so a set is
    described by its net count of base-strength medications ``y`` and of
    double-strength ones ``z``. Mixing signs within one strength never helps
    (dropping an opposite pair keeps the effect with fewer medications), and
    the lowest ids of each class give the first set in id order. The search
    is linear in the number of strong medications per dimension.
    """
    severity = np.asarray(severity, dtype=np.float64)
    growth = model.growth if growth is None else growth
    magnitude = model.effect_magnitude
    action = np.zeros(model.n_medications)
    for j, (weak_down, weak_up, strong_down, strong_up) in enumerate(model.effect_classes):
        drift = (1.0 + growth) * severity[j]
        target = -drift / magnitude
        candidates = []
        for z in range(-len(strong_down), len(strong_up) + 1):
            centre = target - 2 * z
            nearby = (np.floor(centre) - 1, np.floor(centre), np.ceil(centre), np.ceil(centre) + 1)
            for y in {0, *(int(np.clip(c, -len(weak_down), len(weak_up))) for c in nearby)}:
                chosen = (weak_down[:-y] if y < 0 else weak_up[:y]) + (strong_down[:-z] if z < 0 else strong_up[:z])
                candidates.append((abs(drift + magnitude * (y + 2 * z)), tuple(sorted(chosen))))
        best_value = min(value for value, _ in candidates)
        best = min(
            (chosen for value, chosen in candidates if value <= best_value + TIE_TOLERANCE),
            key=lambda chosen: (len(chosen), chosen),
        )
        action[list(best)] = 1.0
    return action


@dataclass
class PatientContext:
    """What a prescriber may look at when choosing the action for step t."""

    static: np.ndarray
    diseases: np.ndarray
    observations: np.ndarray  # (t, F): everything observed so far
    severity: np.ndarray  # hidden; only the oracle and the doctor read it
    growth: float


@dataclass
class SimTrajectory(Trajectory):
    """A simulated admission plus its hidden severity path, shape (T + 1, d)."""

    latent: Optional[np.ndarray] = field(default=None, repr=False)
