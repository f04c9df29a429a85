"""
Epsilon sweep: train one policy per imitation weight and seed, and evaluate
each on its held-out split.

Runs for one seed differ only in how the actor mixes the critic's gradient
with the doctor-imitation signal. ``sweep.csv`` holds one row per
(epsilon, seed) and one ``mean`` row per epsilon.
"""
import logging
from concurrent.futures import Executor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from cohort.models import PatientModel
from core.exceptions import ConfigurationError
from core.run_directory import RunDirectory
from data_pipeline.trajectories import Dataset
from evaluation.config import EvaluationConfig
from evaluation.services.evaluator import evaluate_checkpoint
from evaluation.services.reports import FLOAT_FORMAT, write_reports
from training.config import TrainConfig
from training.services.runner import SPLITS_FILENAME, train_dataset

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.0, 0.25, 0.5, 0.75, 1.0)
SWEEP_FILENAME = 'sweep.csv'
MEAN_LABEL = 'mean'


@dataclass
class SweepRow:
    epsilon: float
    seed: Optional[int]  # None for the mean over seeds
    mean_jaccard: float
    aggregated_jaccard: float
    estimated_mortality: float
    expected_q: float
    mortality_trend: Optional[float] = None
    true_survival: Optional[float] = None

    @property
    def is_mean(self) -> bool:
        return self.seed is None

    @property
    def survival(self) -> float:
        """Simulated survival when available, otherwise one minus estimated mortality."""
        return self.true_survival if self.true_survival is not None else 1.0 - self.estimated_mortality


@dataclass
class EndpointComparison:
    """A mixed epsilon against the pure critic (0) and pure imitation (1) runs, on seed means."""

    epsilon: float
    survival_gain_over_imitation: float
    jaccard_gain_over_critic: float
    endpoint_best_on_both: bool


def _mean(values: Iterable[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None and np.isfinite(v)]
    return float(np.mean(present)) if present else None


def mean_row(epsilon: float, rows: Sequence[SweepRow]) -> SweepRow:
    if not rows:
        raise ValueError(f"no runs to average for epsilon={epsilon:g}")
    return SweepRow(
        epsilon=epsilon,
        seed=None,
        mean_jaccard=_mean(r.mean_jaccard for r in rows),
        aggregated_jaccard=_mean(r.aggregated_jaccard for r in rows),
        estimated_mortality=_mean(r.estimated_mortality for r in rows),
        expected_q=_mean(r.expected_q for r in rows),
        mortality_trend=_mean(r.mortality_trend for r in rows),
        true_survival=_mean(r.true_survival for r in rows),
    )


def compare_endpoints(rows: Sequence[SweepRow], epsilon: float = 0.5) -> Optional[EndpointComparison]:
    """None unless the sweep has mean rows for 0, ``epsilon`` and 1."""
    means = {row.epsilon: row for row in rows if row.is_mean}
    if not {0.0, epsilon, 1.0} <= set(means):
        return None
    best_survival = max(row.survival for row in means.values())
    best_jaccard = max(row.mean_jaccard for row in means.values())
    return EndpointComparison(
        epsilon=epsilon,
        survival_gain_over_imitation=means[epsilon].survival - means[1.0].survival,
        jaccard_gain_over_critic=means[epsilon].mean_jaccard - means[0.0].mean_jaccard,
        endpoint_best_on_both=any(
            means[end].survival >= best_survival and means[end].mean_jaccard >= best_jaccard
            for end in (0.0, 1.0)
        ),
    )


def run_epsilon_sweep(dataset: Dataset, train_config: TrainConfig, eval_config: EvaluationConfig,
                      run: RunDirectory, epsilons: Sequence[float] = DEFAULT_EPSILONS,
                      patient_model: Optional[PatientModel] = None, seed: int = 0,
                      seeds: Optional[Sequence[int]] = None,
                      executor: Optional[Executor] = None) -> List[SweepRow]:
    """
    Train and evaluate one policy per (epsilon, seed) under
    ``run/epsilon-<value>/seed-<seed>``.

    ``seeds`` defaults to the training seed alone. ``seed`` fixes the
    simulated evaluation patients, shared by every run so survival rates are
    paired. Returns the per-seed rows followed by the per-epsilon means, in
    the order written to ``sweep.csv``.
    """
    if seeds is None:
        seeds = (train_config.seed if train_config.seed is not None else seed,)
    if not seeds or len(set(seeds)) != len(seeds):
        raise ConfigurationError(f"seeds must be non-empty and distinct, got {list(seeds)}")

    gamma = eval_config.gamma if eval_config.gamma is not None else train_config.gamma
    per_seed: List[SweepRow] = []
    means: List[SweepRow] = []
    for epsilon in epsilons:
        current = []
        for train_seed in seeds:
            config = TrainConfig.model_validate({**train_config.model_dump(), 'epsilon': epsilon, 'seed': train_seed})
            sub_run = RunDirectory.create('sweep', run.path / f"epsilon-{epsilon:g}" / f"seed-{train_seed}")
            sub_run.write_config(config)
            train_dataset(dataset, config, sub_run)
            report = evaluate_checkpoint(
                sub_run.path, dataset, eval_config, gamma,
                splits_path=sub_run.file(SPLITS_FILENAME),
                patient_model=patient_model, seed=seed, executor=executor,
            )
            write_reports(sub_run, report)
            sub_run.complete()
            summary = report.summary()
            trend = report.mortality.curve.trend()
            current.append(SweepRow(
                epsilon=epsilon,
                seed=train_seed,
                mean_jaccard=summary['mean_jaccard'],
                aggregated_jaccard=summary['aggregated_jaccard'],
                estimated_mortality=summary['estimated_mortality'],
                expected_q=summary['expected_q'],
                mortality_trend=trend if np.isfinite(trend) else None,
                true_survival=summary.get('true_survival'),
            ))
            logger.info(
                f"epsilon={epsilon:g} seed={train_seed}: jaccard={summary['mean_jaccard']:.4f} "
                f"estimated_mortality={summary['estimated_mortality']:.4f}",
                extra={'epsilon': epsilon, 'seed': train_seed},
            )
        per_seed.extend(current)
        means.append(mean_row(epsilon, current))

    rows = per_seed + means
    write_sweep(run.file(SWEEP_FILENAME), rows)
    comparison = compare_endpoints(rows)
    if comparison is not None:
        logger.info(
            f"epsilon={comparison.epsilon:g} vs endpoints: "
            f"survival_gain_over_imitation={comparison.survival_gain_over_imitation:+.4f} "
            f"jaccard_gain_over_critic={comparison.jaccard_gain_over_critic:+.4f}",
            extra=asdict(comparison),
        )
    return rows


def write_sweep(path: Path, rows: Sequence[SweepRow]) -> Path:
    frame = pd.DataFrame([asdict(row) for row in rows])
    frame['seed'] = [MEAN_LABEL if row.is_mean else str(row.seed) for row in rows]
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return Path(path)
