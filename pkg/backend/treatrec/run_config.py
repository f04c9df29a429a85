"""
Umbrella config shared by every management command.

    {
      "seed": 7,
      "workers": 1,
      "paths": {"data": "cohort.jsonl"},
      "train": {"epsilon": 0.5, "epochs": 20},
      "cohort": {"n_admissions": 2000, "p_noise": 0.3},
      "evaluation": {"bins": 50},
      "preprocess": {"knn_k": 10}
    }

Each command reads the sections it needs; the whole resolved document is
snapshotted into the run directory.
"""
from typing import Optional

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cohort.config import CohortConfig
from data_pipeline.config.preprocess import PreprocessConfig
from evaluation.config import EvaluationConfig
from training.config import TrainConfig


class PathsConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    data: Optional[str] = None  # trajectory JSONL
    extracts: Optional[str] = None  # directory of CSV extracts
    category_map: Optional[str] = None
    checkpoint: Optional[str] = None
    resume: Optional[str] = None
    splits: Optional[str] = None
    output: Optional[str] = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    workers: int = Field(default_factory=lambda: settings.DEFAULT_WORKERS, ge=1)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    cohort: CohortConfig = Field(default_factory=CohortConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)

    @model_validator(mode='after')
    def fill_train_defaults(self) -> 'RunConfig':
        """The training section inherits the global seed and worker count unless it sets its own."""
        updates = {}
        if self.train.seed is None:
            updates['seed'] = self.seed
        if 'workers' not in self.train.model_fields_set:
            updates['workers'] = self.workers
        if updates:
            self.train = self.train.model_copy(update=updates)
        return self
