"""
Trajectory interchange schemas.

One admission per JSONL line:

    {"id": "...", "static": {"age": 63.0, ...}, "diseases": [3, 17],
     "units": [{"t": 0, "obs": [...], "meds": [0, 4], "reward": 0.0}, ...],
     "survived": true}

plus a ``<name>.meta.json`` manifest describing the feature layout and
vocabularies. The same format is written by the simulator and the
preprocessing pipeline and read by training and evaluation.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

MANIFEST_FORMAT_VERSION = 1


class UnitRecord(BaseModel):
    """One time unit (24 hours for real extracts, one step for simulated cohorts)."""
    model_config = ConfigDict(extra='forbid')

    t: int = Field(ge=0)
    obs: List[Optional[float]]  # None marks a missing measurement
    meds: List[int]
    reward: float = 0.0


class AdmissionRecord(BaseModel):
    model_config = ConfigDict(extra='forbid')

    id: str
    static: Dict[str, Optional[float]]
    diseases: List[int]
    units: List[UnitRecord] = Field(min_length=1)
    survived: bool

    @model_validator(mode='after')
    def units_are_contiguous(self):
        for expected, unit in enumerate(self.units):
            if unit.t != expected:
                raise ValueError(f"unit {expected} has t={unit.t}; units must be contiguous from 0")
        return self


class DatasetManifest(BaseModel):
    """Feature layout shared by every admission of a trajectory file."""
    model_config = ConfigDict(extra='forbid')

    format_version: int = MANIFEST_FORMAT_VERSION
    n_medications: int = Field(ge=1)
    n_diseases: int = Field(ge=0)
    static_fields: List[str]
    series_fields: List[str] = Field(min_length=1)
    medication_vocab: Optional[List[str]] = None  # original code of each medication id
    disease_vocab: Optional[List[str]] = None
    source: Optional[str] = None

    @model_validator(mode='after')
    def vocabularies_match_counts(self):
        if self.medication_vocab is not None and len(self.medication_vocab) != self.n_medications:
            raise ValueError(
                f"medication_vocab has {len(self.medication_vocab)} codes for {self.n_medications} medications"
            )
        if self.disease_vocab is not None and len(self.disease_vocab) != self.n_diseases:
            raise ValueError(
                f"disease_vocab has {len(self.disease_vocab)} codes for {self.n_diseases} diseases"
            )
        return self
