"""
Evaluate a trained policy on held-out admissions.

For each admission the policy recommends a prescription at every step from
the history so far. The recommendations are compared with the doctor's
(Jaccard, treatment difference), and the critic's Q values of the logged
actions are binned against outcomes to read off the policy's estimated
mortality at its expected Q.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from cohort.models import PatientModel
from cohort.services.simulator import evaluate_policy_true_survival
from core.exceptions import EmptyInputError
from data_pipeline.trajectories import Dataset, Trajectory
from evaluation.config import EvaluationConfig
from evaluation.services.metrics import (
    DifferenceCurve,
    JaccardReport,
    MortalityEstimate,
    aggregated_jaccards,
    difference_curve,
    discounted_return,
    estimated_mortality,
    mean_jaccard,
)
from networks.checkpoint import load_checkpoint
from training.policy import TrainedPolicy
from training.services.runner import check_compatible, select_split
from training.services.srl import ordered_map

logger = logging.getLogger(__name__)


@dataclass
class AdmissionResult:
    admission_id: str
    recommended: np.ndarray  # (T, K) binary
    doctor_q: np.ndarray  # Q(c_t, doctor action)
    policy_q: np.ndarray  # Q(c_t, mu(c_t))
    logged_return: float
    died: bool


@dataclass
class EvaluationReport:
    admissions: List[AdmissionResult]
    jaccard: JaccardReport
    mortality: MortalityEstimate
    differences: DifferenceCurve
    expected_return: float
    true_survival: Optional[float] = None
    baseline: bool = False

    def summary(self) -> dict:
        summary = {
            'admissions': len(self.admissions),
            'mean_jaccard': self.jaccard.mean,
            'aggregated_jaccard': self.jaccard.aggregated,
            'estimated_mortality': self.mortality.rate,
            'expected_q': self.mortality.expected_q,
            'expected_return': self.expected_return,
            'observed_mortality': float(np.mean([a.died for a in self.admissions])),
        }
        if self.true_survival is not None:
            summary['true_survival'] = self.true_survival
        return summary


def evaluate_admission(policy: TrainedPolicy, trajectory: Trajectory, gamma: float,
                       baseline: bool = False) -> AdmissionResult:
    probabilities, cache = policy.policy.forward(trajectory)
    if baseline:
        recommended = trajectory.actions.copy()
        policy_q = policy.critic.q_value(cache.encoded, trajectory.actions)
    else:
        recommended = (probabilities >= policy.threshold).astype(np.float64)
        policy_q = policy.critic.q_value(cache.encoded, probabilities)
    return AdmissionResult(
        admission_id=trajectory.admission_id,
        recommended=recommended,
        doctor_q=policy.critic.q_value(cache.encoded, trajectory.actions),
        policy_q=policy_q,
        logged_return=discounted_return(trajectory.rewards, gamma),
        died=trajectory.died,
    )


def evaluate_policy(policy: TrainedPolicy, trajectories: Sequence[Trajectory], gamma: float,
                    bins: int = 50, baseline: bool = False,
                    executor: Optional[Executor] = None) -> EvaluationReport:
    """
    Args:
        policy: trained policy with its critic
        trajectories: complete held-out admissions
        gamma: discount for logged returns
        bins: equal-width Q bins for the mortality curve
        baseline: score the doctor's own prescriptions instead of the policy's
    """
    if not trajectories:
        raise EmptyInputError("evaluation needs at least one admission")
    results = ordered_map(lambda t: evaluate_admission(policy, t, gamma, baseline), trajectories, executor)

    recommended = [r.recommended for r in results]
    prescribed = [t.actions for t in trajectories]
    died = [r.died for r in results]

    jaccard = mean_jaccard(recommended, prescribed)
    jaccard.per_patient_aggregated = aggregated_jaccards(recommended, prescribed)
    jaccard.aggregated = float(np.mean(jaccard.per_patient_aggregated))
    expected_q = float(np.mean(np.concatenate([r.policy_q for r in results])))
    mortality = estimated_mortality([r.doctor_q for r in results], died, expected_q, bins)
    report = EvaluationReport(
        admissions=results,
        jaccard=jaccard,
        mortality=mortality,
        differences=difference_curve(recommended, prescribed, died),
        expected_return=float(np.mean([r.logged_return for r in results])),
        baseline=baseline,
    )
    logger.info(
        f"Evaluated {len(results)} admissions: jaccard={jaccard.mean:.4f} "
        f"estimated_mortality={mortality.rate:.4f}",
        extra={k: v for k, v in report.summary().items() if v is not None},
    )
    return report


def evaluate_checkpoint(checkpoint_path, dataset: Dataset, config: EvaluationConfig, gamma: float,
                        splits_path=None, patient_model: Optional[PatientModel] = None, seed: int = 0,
                        executor: Optional[Executor] = None, baseline: bool = False) -> EvaluationReport:
    """
    Load a checkpoint and evaluate it on ``dataset`` (or one split of it).

    Args:
        checkpoint_path: checkpoint file or training run directory
        dataset: complete trajectories with their manifest
        config: threshold, bin count, split name and simulated episode count
        gamma: discount for logged returns
        splits_path: ``splits.json`` of the training run; when given only
            ``config.split`` is evaluated
        patient_model: simulator the data came from; with ``config.episodes > 0``
            the policy also treats that many fresh simulated patients
        baseline: score the doctor's prescriptions against themselves

    Raises:
        ShapeMismatchError: checkpoint and data disagree on K or feature dimensions
    """
    checkpoint = load_checkpoint(checkpoint_path)
    check_compatible(checkpoint.bundle.architecture, dataset.manifest)
    trajectories = dataset.trajectories
    if splits_path is not None:
        trajectories = select_split(trajectories, splits_path, config.split)
    policy = TrainedPolicy.from_bundle(checkpoint.bundle, config.threshold)
    report = evaluate_policy(policy, trajectories, gamma, config.bins, baseline, executor)

    if patient_model is not None and config.episodes > 0:
        check_compatible(checkpoint.bundle.architecture, patient_model.manifest())
        report.true_survival = evaluate_policy_true_survival(
            patient_model, policy, config.episodes, seed, executor,
        )
        logger.info(f"Simulated survival under the policy: {report.true_survival:.4f}")
    return report
