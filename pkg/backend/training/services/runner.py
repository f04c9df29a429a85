"""
Training runs: dataset split, network setup, checkpointing and resume.

A run directory holds ``config.json``, ``splits.json``, ``metrics.csv`` and
``checkpoint.json``. The checkpoint is rewritten after every epoch, so an
interrupted run can be resumed from its last completed epoch and continues
with exactly the trace an uninterrupted run would produce.
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from django.conf import settings

from core.exceptions import ConfigurationError, EmptyInputError, ShapeMismatchError
from core.rng import STREAM_SPLIT, RngState
from core.run_directory import RunDirectory
from data_pipeline.schemas import DatasetManifest
from data_pipeline.trajectories import Dataset, Trajectory
from networks.architecture import Architecture
from networks.bundle import NetworkBundle
from networks.checkpoint import load_checkpoint, save_checkpoint
from networks.encoder import InputNormalizer
from training.config import TrainConfig
from training.replay import ReplayBuffer
from training.services.trainer import EpochMetrics, SrlTrainer, TrainingResult

logger = logging.getLogger(__name__)

SPLITS_FILENAME = 'splits.json'
METRICS_FILENAME = 'metrics.csv'
METRICS_COLUMNS = ['epoch', 'mean_td_error', 'mean_return', 'jaccard']
SPLIT_NAMES = ('train', 'validation', 'test')


def split_dataset(trajectories: Sequence[Trajectory], seed: int,
                  proportions: Optional[Mapping[str, float]] = None) -> Dict[str, List[Trajectory]]:
    """
    Seeded permutation split into train / validation / test.

    Validation and test get ``floor(p * n)`` admissions each; train keeps the
    rest, so it is never empty.
    """
    proportions = proportions or settings.TREATREC_DEFAULTS['split']
    if abs(sum(proportions[name] for name in SPLIT_NAMES) - 1.0) > 1e-9:
        raise ConfigurationError(f"split proportions must sum to 1.0, got {dict(proportions)}")
    n = len(trajectories)
    if n == 0:
        raise EmptyInputError("cannot split an empty dataset")
    order = RngState(seed).child(STREAM_SPLIT).generator().permutation(n)
    n_validation = int(np.floor(proportions['validation'] * n))
    n_test = int(np.floor(proportions['test'] * n))
    n_train = n - n_validation - n_test
    return {
        'train': [trajectories[i] for i in order[:n_train]],
        'validation': [trajectories[i] for i in order[n_train:n_train + n_validation]],
        'test': [trajectories[i] for i in order[n_train + n_validation:]],
    }


def write_splits(run: RunDirectory, splits: Mapping[str, Sequence[Trajectory]]) -> Path:
    return run.write_json(SPLITS_FILENAME, {
        name: [t.admission_id for t in splits[name]] for name in SPLIT_NAMES
    })


def select_split(trajectories: Sequence[Trajectory], splits_path: Union[str, Path], name: str) -> List[Trajectory]:
    """Admissions of one named split, in the order recorded in ``splits.json``."""
    ids = json.loads(Path(splits_path).read_text(encoding='utf-8'))[name]
    by_id = {t.admission_id: t for t in trajectories}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ShapeMismatchError(f"{len(missing)} admissions of the {name} split are not in the dataset")
    return [by_id[i] for i in ids]


def architecture_for(manifest: DatasetManifest, config: TrainConfig) -> Architecture:
    if config.n_medications is not None and config.n_medications != manifest.n_medications:
        raise ShapeMismatchError(
            f"config expects {config.n_medications} medications, dataset has {manifest.n_medications}"
        )
    return Architecture.from_config(
        config,
        series_dim=len(manifest.series_fields),
        static_dim=len(manifest.static_fields),
        disease_dim=manifest.n_diseases,
        n_medications=manifest.n_medications,
    )


def check_compatible(architecture: Architecture, manifest: DatasetManifest):
    """Raise ShapeMismatchError if checkpoint and dataset disagree on K or feature dimensions."""
    expected = {
        'n_medications': manifest.n_medications,
        'series_dim': len(manifest.series_fields),
        'static_dim': len(manifest.static_fields),
        'disease_dim': manifest.n_diseases,
    }
    mismatched = {
        name: (getattr(architecture, name), value)
        for name, value in expected.items() if getattr(architecture, name) != value
    }
    if mismatched:
        details = ', '.join(f"{name} checkpoint={a} data={b}" for name, (a, b) in mismatched.items())
        raise ShapeMismatchError(f"checkpoint and data disagree: {details}")


def write_metrics(path: Union[str, Path], trace: Sequence[EpochMetrics]) -> Path:
    frame = pd.DataFrame([m.as_dict() for m in trace], columns=METRICS_COLUMNS)
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    return Path(path)


def trace_from_state(state: Mapping) -> List[EpochMetrics]:
    return [EpochMetrics(**row) for row in state.get('trace', [])]


def train_dataset(dataset: Dataset, config: TrainConfig, run: RunDirectory,
                  resume_from: Optional[Union[str, Path]] = None) -> TrainingResult:
    """
    Train on the train split of ``dataset`` and write every artifact into ``run``.

    Args:
        dataset: complete (imputed) trajectories with their manifest
        config: resolved training config; ``config.seed`` must be set
        run: output directory
        resume_from: checkpoint file or run directory to continue from
    """
    if config.seed is None:
        raise ConfigurationError("training needs a seed")
    splits = split_dataset(dataset.trajectories, config.seed)
    write_splits(run, splits)
    logger.info(
        f"Split {len(dataset)} admissions: train={len(splits['train'])} "
        f"validation={len(splits['validation'])} test={len(splits['test'])}"
    )

    architecture = architecture_for(dataset.manifest, config)
    if resume_from is not None:
        checkpoint = load_checkpoint(resume_from)
        check_compatible(checkpoint.bundle.architecture, dataset.manifest)
        if checkpoint.bundle.architecture != architecture:
            raise ShapeMismatchError("checkpoint architecture differs from the configured network sizes")
        bundle = checkpoint.bundle
        start_epoch = checkpoint.epochs_completed
        trace = trace_from_state(checkpoint.state)
        logger.info(f"Resuming from {resume_from} after {start_epoch} epochs")
    else:
        normalizer = InputNormalizer.fit(splits['train'])
        bundle = NetworkBundle.initialize(architecture, config.seed, normalizer)
        start_epoch, trace = 0, []

    def checkpoint_state(trainer: SrlTrainer, current: List[EpochMetrics]):
        save_checkpoint(run.file('checkpoint.json'), trainer.bundle, {
            'epochs_completed': len(current),
            'trace': [m.as_dict() for m in current],
            'seed': config.seed,
        })
        write_metrics(run.file(METRICS_FILENAME), current)

    buffer = ReplayBuffer(splits['train'], capacity=config.buffer_capacity, seed=config.seed)
    trainer = SrlTrainer(config, buffer, bundle, splits['validation'])
    result = trainer.train(start_epoch=start_epoch, trace=trace, on_epoch_end=checkpoint_state)
    checkpoint_state(trainer, result.trace)
    return result
