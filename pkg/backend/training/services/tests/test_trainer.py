"""
Tests for the epoch loop, resume and the training runner.
"""
import json

import numpy as np
import pytest

from core.exceptions import ConfigurationError, EmptyInputError, ShapeMismatchError
from core.params import flatten
from core.rng import make_rng
from core.run_directory import RunDirectory
from data_pipeline.schemas import DatasetManifest
from data_pipeline.trajectories import Dataset, Trajectory
from networks.architecture import Architecture
from networks.bundle import NetworkBundle
from networks.checkpoint import load_checkpoint
from training.config import TrainConfig
from training.replay import ReplayBuffer
from training.services.runner import architecture_for, check_compatible, split_dataset, train_dataset
from training.services.trainer import SrlTrainer, train_epochs


def small_config(**overrides) -> TrainConfig:
    values = dict(
        epochs=3, batch_size=4, steps_per_epoch=3, seed=11,
        lstm_hidden=4, static_hidden=3, disease_hidden=3,
        actor_hidden=[5], critic_hidden=[5],
    )
    values.update(overrides)
    return TrainConfig(**values)


def manifest(n_medications=3) -> DatasetManifest:
    return DatasetManifest(
        n_medications=n_medications,
        n_diseases=4,
        static_fields=['age', 'weight'],
        series_fields=['hr', 'map', 'lactate'],
    )


def logged_admissions(n: int, seed: int = 0, pattern=None):
    rng = make_rng(seed)
    admissions = []
    for i in range(n):
        length = int(rng.integers(2, 6))
        survived = bool(rng.random() < 0.7)
        rewards = np.zeros(length)
        rewards[-1] = 15.0 if survived else -15.0
        if pattern is None:
            actions = (rng.random((length, 3)) < 0.4).astype(float)
        else:
            actions = np.tile(pattern, (length, 1)).astype(float)
        admissions.append(Trajectory(
            admission_id=f"adm-{i:03d}",
            static=rng.normal(size=2),
            diseases=(rng.random(4) < 0.3).astype(float),
            observations=rng.normal(size=(length, 3)),
            actions=actions,
            rewards=rewards,
            survived=survived,
        ))
    return admissions


def architecture(config: TrainConfig) -> Architecture:
    return architecture_for(manifest(), config)


def train(config: TrainConfig, admissions, **kwargs):
    bundle = NetworkBundle.initialize(architecture(config), config.seed)
    buffer = ReplayBuffer(admissions, seed=config.seed)
    return train_epochs(config, buffer, bundle, **kwargs)


class TestEpochLoop:

    def test_zero_epochs_leaves_networks_unchanged(self):
        config = small_config(epochs=0)
        initial = NetworkBundle.initialize(architecture(config), config.seed)
        result = train(config, logged_admissions(10))
        assert result.trace == []
        np.testing.assert_array_equal(flatten(result.bundle.policy.params), flatten(initial.policy.params))
        np.testing.assert_array_equal(flatten(result.bundle.critic.params), flatten(initial.critic.params))

    def test_same_seed_same_run(self):
        config = small_config()
        a = train(config, logged_admissions(10))
        b = train(config, logged_admissions(10))
        assert [m.as_dict() for m in a.trace] == [m.as_dict() for m in b.trace]
        np.testing.assert_array_equal(flatten(a.bundle.policy.params), flatten(b.bundle.policy.params))

    def test_trace_has_one_row_per_epoch(self):
        result = train(small_config(), logged_admissions(10))
        assert [m.epoch for m in result.trace] == [1, 2, 3]
        for metrics in result.trace:
            assert np.isfinite(metrics.mean_td_error)
            assert 0.0 <= metrics.jaccard <= 1.0

    def test_resume_reproduces_uninterrupted_run(self):
        admissions = logged_admissions(10)
        config = small_config()
        full = train(config, admissions)

        first = train(small_config(epochs=1), admissions)
        resumed = train_epochs(
            config, ReplayBuffer(admissions, seed=config.seed), first.bundle,
            start_epoch=1, trace=first.trace,
        )
        assert [m.as_dict() for m in resumed.trace] == [m.as_dict() for m in full.trace]
        np.testing.assert_array_equal(flatten(resumed.bundle.policy.params), flatten(full.bundle.policy.params))
        np.testing.assert_array_equal(
            flatten(resumed.bundle.targets.critic.params), flatten(full.bundle.targets.critic.params),
        )

    def test_parallel_workers_match_serial(self):
        admissions = logged_admissions(10)
        serial = train(small_config(), admissions)
        parallel = train(small_config(workers=3), admissions)
        assert [m.as_dict() for m in parallel.trace] == [m.as_dict() for m in serial.trace]

    def test_pure_imitation_learns_fixed_prescription(self):
        pattern = np.array([1.0, 0.0, 1.0])
        admissions = logged_admissions(8, pattern=pattern)
        config = small_config(epsilon=1.0, actor_lr=0.5, grad_clip=None, epochs=5, steps_per_epoch=40)
        result = train(config, admissions)
        for admission in admissions:
            np.testing.assert_array_equal(result.policy.recommend_all(admission), np.tile(pattern, (admission.length, 1)))
        assert result.trace[-1].jaccard == 1.0

    def test_empty_buffer_rejected(self):
        config = small_config()
        bundle = NetworkBundle.initialize(architecture(config), config.seed)
        with pytest.raises(EmptyInputError):
            SrlTrainer(config, ReplayBuffer(), bundle)


class TestRunner:

    def test_split_proportions(self):
        splits = split_dataset(logged_admissions(25), seed=3)
        assert [len(splits[name]) for name in ('train', 'validation', 'test')] == [21, 2, 2]
        ids = [t.admission_id for name in splits for t in splits[name]]
        assert len(set(ids)) == 25

    def test_split_is_seeded(self):
        a = split_dataset(logged_admissions(25), seed=3)
        b = split_dataset(logged_admissions(25), seed=3)
        assert [t.admission_id for t in a['test']] == [t.admission_id for t in b['test']]

    def test_bad_split_proportions(self):
        with pytest.raises(ConfigurationError):
            split_dataset(logged_admissions(5), seed=0, proportions={'train': 0.5, 'validation': 0.1, 'test': 0.1})

    def test_medication_count_must_match_data(self):
        with pytest.raises(ShapeMismatchError):
            architecture_for(manifest(), small_config(n_medications=5))

    def test_checkpoint_compatibility(self):
        arch = architecture(small_config())
        check_compatible(arch, manifest())
        with pytest.raises(ShapeMismatchError):
            check_compatible(arch, manifest(n_medications=4))

    def test_run_directory_artifacts(self, tmp_path):
        dataset = Dataset(logged_admissions(20), manifest())
        run = RunDirectory.create('train', tmp_path / 'run')
        train_dataset(dataset, small_config(epochs=2), run)
        assert {'splits.json', 'metrics.csv', 'checkpoint.json'} <= {p.name for p in run.path.iterdir()}
        checkpoint = load_checkpoint(run.path)
        assert checkpoint.epochs_completed == 2
        assert set(json.loads(run.file('splits.json').read_text())) == {'train', 'validation', 'test'}
        header = run.file('metrics.csv').read_text().splitlines()[0]
        assert header == 'epoch,mean_td_error,mean_return,jaccard'

    def test_resume_from_checkpoint_matches_uninterrupted(self, tmp_path):
        dataset = Dataset(logged_admissions(20), manifest())
        full_run = RunDirectory.create('train', tmp_path / 'full')
        full = train_dataset(dataset, small_config(epochs=3), full_run)

        partial_run = RunDirectory.create('train', tmp_path / 'partial')
        train_dataset(dataset, small_config(epochs=1), partial_run)
        resumed_run = RunDirectory.create('train', tmp_path / 'resumed')
        resumed = train_dataset(dataset, small_config(epochs=3), resumed_run, resume_from=partial_run.path)

        assert [m.as_dict() for m in resumed.trace] == [m.as_dict() for m in full.trace]
        assert resumed_run.file('metrics.csv').read_text() == full_run.file('metrics.csv').read_text()
