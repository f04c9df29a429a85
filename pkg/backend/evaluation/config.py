"""
Evaluation settings.
"""
from typing import Optional

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    threshold: float = Field(default_factory=lambda: settings.TREATREC_DEFAULTS['selection_threshold'], gt=0.0, lt=1.0)
    bins: int = Field(default_factory=lambda: settings.TREATREC_DEFAULTS['mortality_bins'], ge=2)
    gamma: Optional[float] = Field(default=None, ge=0.0, le=1.0)  # None: the training gamma
    split: str = 'test'
    episodes: int = Field(default=0, ge=0)  # simulated admissions for true survival; 0 skips it
