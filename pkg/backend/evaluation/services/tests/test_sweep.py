"""
Tests for sweep aggregation and, on a small simulated cohort, for how the
imitation weight trades survival against agreement with the doctor.

The cohort tests train several policies and are marked ``slow``; run them
with ``pytest -m slow``.
"""
import math

import pytest

from cohort.config import CohortConfig
from cohort.services.simulator import sample_cohort
from core.run_directory import RunDirectory
from data_pipeline.trajectories import Dataset
from evaluation.config import EvaluationConfig
from evaluation.services.sweep import SweepRow, compare_endpoints, mean_row, run_epsilon_sweep
from training.config import TrainConfig


def row(epsilon, seed=None, jaccard=0.5, mortality=0.2, survival=None, trend=None):
    return SweepRow(
        epsilon=epsilon, seed=seed, mean_jaccard=jaccard, aggregated_jaccard=jaccard,
        estimated_mortality=mortality, expected_q=0.0, mortality_trend=trend, true_survival=survival,
    )


class TestMeanRow:

    def test_averages_each_metric(self):
        mean = mean_row(0.5, [row(0.5, 0, jaccard=0.2, survival=0.6), row(0.5, 1, jaccard=0.4, survival=0.8)])
        assert mean.is_mean
        assert mean.mean_jaccard == pytest.approx(0.3)
        assert mean.true_survival == pytest.approx(0.7)

    def test_missing_values_are_skipped(self):
        mean = mean_row(0.0, [row(0.0, 0, trend=-0.8), row(0.0, 1, trend=None), row(0.0, 2, trend=math.nan)])
        assert mean.mortality_trend == pytest.approx(-0.8)
        assert mean.true_survival is None

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            mean_row(0.5, [])


class TestCompareEndpoints:

    def test_mixture_against_endpoints(self):
        rows = [
            row(0.0, jaccard=0.10, survival=0.60),
            row(0.5, jaccard=0.40, survival=0.75),
            row(1.0, jaccard=0.45, survival=0.70),
        ]
        comparison = compare_endpoints(rows)
        assert comparison.survival_gain_over_imitation == pytest.approx(0.05)
        assert comparison.jaccard_gain_over_critic == pytest.approx(0.30)
        assert not comparison.endpoint_best_on_both

    def test_endpoint_dominating_is_flagged(self):
        rows = [row(0.0, jaccard=0.1, survival=0.5), row(0.5, jaccard=0.3, survival=0.6),
                row(1.0, jaccard=0.5, survival=0.8)]
        assert compare_endpoints(rows).endpoint_best_on_both

    def test_falls_back_to_estimated_mortality(self):
        rows = [row(0.0, mortality=0.3), row(0.5, mortality=0.1), row(1.0, mortality=0.2)]
        assert compare_endpoints(rows).survival_gain_over_imitation == pytest.approx(0.1)

    def test_only_mean_rows_count(self):
        rows = [row(0.0, seed=0), row(0.5, seed=0), row(1.0, seed=0), row(0.0), row(1.0)]
        assert compare_endpoints(rows) is None


@pytest.fixture(scope='module')
def cohort_sweep(tmp_path_factory):
    cohort_config = CohortConfig(n_admissions=800, p_noise=0.3)
    model = cohort_config.to_patient_model()
    cohort = sample_cohort(model, cohort_config.to_doctor(), cohort_config.n_admissions, seed=11)
    dataset = Dataset(trajectories=list(cohort), manifest=model.manifest())
    train_config = TrainConfig(
        epochs=15, batch_size=32, lstm_hidden=16, static_hidden=8, disease_hidden=8,
        actor_hidden=[32], critic_hidden=[32],
    )
    eval_config = EvaluationConfig(bins=10, episodes=500)
    run = RunDirectory.create('sweep', tmp_path_factory.mktemp('cohort-sweep'))
    return run_epsilon_sweep(
        dataset, train_config, eval_config, run, epsilons=(0.0, 0.5, 1.0),
        patient_model=model, seed=3, seeds=(0, 1),
    )


@pytest.mark.slow
class TestImitationTradeoff:

    def test_mixture_beats_each_endpoint_where_it_is_weak(self, cohort_sweep):
        comparison = compare_endpoints(cohort_sweep)
        assert comparison.survival_gain_over_imitation > 0
        assert comparison.jaccard_gain_over_critic > 0

    def test_mortality_falls_as_expected_return_rises(self, cohort_sweep):
        mixture = next(r for r in cohort_sweep if r.is_mean and r.epsilon == 0.5)
        assert mixture.mortality_trend is not None
        assert mixture.mortality_trend < -0.5
