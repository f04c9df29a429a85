"""
Cohort generator settings.
"""
from pydantic import BaseModel, ConfigDict, Field

from cohort.models import PatientModel
from cohort.services.policies import DoctorPolicy


class CohortConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    n_admissions: int = Field(default=2000, ge=1)
    p_noise: float = Field(default=0.3, ge=0.0, le=1.0)

    latent_dim: int = Field(default=6, ge=1)
    n_medications: int = Field(default=20, ge=1)
    growth: float = Field(default=0.05, ge=0.0)
    process_noise: float = Field(default=0.1, ge=0.0)
    observation_noise: float = Field(default=0.3, ge=0.0)
    initial_severity: float = Field(default=1.0, ge=0.0)
    effect_magnitude: float = Field(default=0.5, gt=0.0)
    strong_from: int = Field(default=12, ge=0)
    min_length: int = Field(default=3, ge=1)
    max_length: int = Field(default=10, ge=1)
    survival_threshold: float = 0.7
    survival_temperature: float = Field(default=0.05, gt=0.0)
    disease_threshold: float = Field(default=0.5, ge=0.0)
    reward_survived: float = 15.0
    reward_died: float = -15.0

    def to_patient_model(self) -> PatientModel:
        return PatientModel(**self.model_dump(exclude={'n_admissions', 'p_noise'}))

    def to_doctor(self) -> DoctorPolicy:
        return DoctorPolicy(self.to_patient_model(), self.p_noise)
