"""
Training hyperparameters.
"""
from typing import List, Optional

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    epsilon: float = Field(default=0.5, ge=0.0, le=1.0)  # 0 = pure RL, 1 = pure imitation
    gamma: float = Field(default=0.99, ge=0.0, le=1.0)
    tau: float = Field(default=0.01, gt=0.0, le=1.0)
    actor_lr: float = Field(default=0.01, gt=0.0)
    critic_lr: float = Field(default=0.001, gt=0.0)
    batch_size: int = Field(default=32, ge=1)
    epochs: int = Field(default=10, ge=0)
    steps_per_epoch: Optional[int] = Field(default=None, ge=1)  # None: one pass over the buffer
    n_medications: Optional[int] = Field(default=None, ge=1)  # None: taken from the dataset manifest
    seed: Optional[int] = Field(default=None, ge=0)  # None: the run's global seed

    lstm_hidden: int = Field(default=64, ge=1)
    static_hidden: int = Field(default=32, ge=1)
    disease_hidden: int = Field(default=64, ge=1)
    actor_hidden: List[int] = Field(default_factory=lambda: [128, 128])
    critic_hidden: List[int] = Field(default_factory=lambda: [128, 128])
    recurrent: bool = True
    use_static: bool = True
    use_diseases: bool = True

    grad_clip: Optional[float] = Field(default=5.0, gt=0.0)
    buffer_capacity: Optional[int] = Field(default=None, ge=1)
    threshold: float = Field(default_factory=lambda: settings.TREATREC_DEFAULTS['selection_threshold'], gt=0.0, lt=1.0)
    workers: int = Field(default=1, ge=1)
    validation_limit: int = Field(default=500, ge=1)
