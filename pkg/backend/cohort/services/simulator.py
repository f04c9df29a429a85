"""
Cohort simulation and ground-truth policy evaluation.

Every episode draws from its own streams keyed by (seed, purpose, index),
with separate sub-streams for patient dynamics, observation noise, the
prescriber and the outcome. Two prescribers evaluated with the same seed
therefore face the same patients and the same noise (common random
numbers), and results do not depend on scheduling.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from cohort.models import STATIC_FIELDS, MAX_AGE, MIN_AGE, PatientContext, PatientModel, SimTrajectory
from cohort.services.policies import DoctorPolicy, Prescriber
from core.exceptions import ConfigurationError
from core.rng import STREAM_EPISODE, STREAM_EVALUATION, RngState
from training.services.srl import ordered_map

logger = logging.getLogger(__name__)

DYNAMICS, OBSERVATION, PRESCRIBER, OUTCOME = range(4)


@dataclass
class CohortSummary:
    admissions: int
    survival_rate: float
    mean_length: float


def sample_static(model: PatientModel, rng: np.random.Generator) -> np.ndarray:
    """Demographics in STATIC_FIELDS order."""
    values = {
        'age': rng.uniform(MIN_AGE, MAX_AGE),
        'gender': float(rng.random() < 0.5),
        'weight': float(np.clip(rng.normal(75.0, 15.0), 40.0, 160.0)),
        'height': float(np.clip(rng.normal(170.0, 10.0), 140.0, 210.0)),
    }
    return np.array([values[name] for name in STATIC_FIELDS])


def simulate_episode(model: PatientModel, prescriber: Prescriber, stream: RngState,
                     admission_id: str) -> SimTrajectory:
    dynamics = stream.child(DYNAMICS).generator()
    observation_noise = stream.child(OBSERVATION).generator()
    prescriber_rng = stream.child(PRESCRIBER).generator()
    outcome = stream.child(OUTCOME).generator()

    length = int(dynamics.integers(model.min_length, model.max_length + 1))
    static = sample_static(model, dynamics)
    growth = model.patient_growth(static[STATIC_FIELDS.index('age')])
    severity = dynamics.normal(0.0, model.initial_severity, model.latent_dim)
    diseases = model.diseases_for(severity)

    observations = np.empty((length, model.latent_dim))
    actions = np.empty((length, model.n_medications))
    latent = [severity]
    for t in range(length):
        observations[t] = severity + observation_noise.normal(0.0, model.observation_noise, model.latent_dim)
        context = PatientContext(
            static=static,
            diseases=diseases,
            observations=observations[:t + 1],
            severity=severity,
            growth=growth,
        )
        actions[t] = prescriber.prescribe(context, prescriber_rng)
        noise = dynamics.normal(0.0, model.process_noise, model.latent_dim)
        severity = model.step(severity, growth, actions[t], noise)
        latent.append(severity)

    survived = bool(outcome.random() < model.survival_probability(severity))
    rewards = np.zeros(length)
    rewards[-1] = model.reward_survived if survived else model.reward_died
    return SimTrajectory(
        admission_id=admission_id,
        static=static,
        diseases=diseases,
        observations=observations,
        actions=actions,
        rewards=rewards,
        survived=survived,
        latent=np.stack(latent),
    )


def sample_cohort(model: PatientModel, doctor: DoctorPolicy, n: int, seed: int,
                  executor: Optional[Executor] = None) -> List[SimTrajectory]:
    """
    Simulate ``n`` admissions treated by ``doctor``.

    Admission ids are ``sim-<index>``; the same (model, doctor, n, seed)
    always yields the same cohort.
    """
    if n < 1:
        raise ConfigurationError(f"cohort size must be >= 1, got {n}")
    base = RngState(seed).child(STREAM_EPISODE)
    cohort = ordered_map(
        lambda index: simulate_episode(model, doctor, base.child(index), f"sim-{index:06d}"),
        range(n),
        executor,
    )
    summary = summarize(cohort)
    logger.info(
        f"Simulated {summary.admissions} admissions: survival={summary.survival_rate:.3f} "
        f"mean_length={summary.mean_length:.2f}",
        extra={'admissions': summary.admissions, 'survival_rate': summary.survival_rate, 'p_noise': doctor.p_noise},
    )
    return cohort


def evaluate_policy_true_survival(model: PatientModel, policy: Prescriber, episodes: int, seed: int,
                                  executor: Optional[Executor] = None) -> float:
    """
    Expected survival rate when ``policy`` treats fresh simulated patients.

    Each episode contributes the survival probability of its final severity
    rather than a sampled outcome. Uses a stream disjoint from
    ``sample_cohort``'s, so evaluation patients are never the training
    admissions.
    """
    if episodes < 1:
        raise ConfigurationError(f"episodes must be >= 1, got {episodes}")
    base = RngState(seed).child(STREAM_EVALUATION)
    probabilities = ordered_map(
        lambda index: model.survival_probability(
            simulate_episode(model, policy, base.child(index), f"eval-{index:06d}").latent[-1]
        ),
        range(episodes),
        executor,
    )
    return float(np.mean(probabilities))


def summarize(cohort: List[SimTrajectory]) -> CohortSummary:
    return CohortSummary(
        admissions=len(cohort),
        survival_rate=float(np.mean([t.survived for t in cohort])) if cohort else 0.0,
        mean_length=float(np.mean([t.length for t in cohort])) if cohort else 0.0,
    )
