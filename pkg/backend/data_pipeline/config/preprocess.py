"""
Preprocessing settings and the CSV extract column contract.

Extract files (all UTF-8 CSV with a header row):

    admissions.csv   admission_id, admit_time, discharge_time, age, gender, weight, height, survived
    measurements.csv admission_id, time, variable, value
    medications.csv  admission_id, time, code
    diagnoses.csv    admission_id, code

Times are ISO-8601 timestamps; ``survived`` is 1 or 0.
"""
from pydantic import BaseModel, ConfigDict, Field

EXTRACT_COLUMNS = {
    'admissions': ['admission_id', 'admit_time', 'discharge_time', 'age', 'gender', 'weight', 'height', 'survived'],
    'measurements': ['admission_id', 'time', 'variable', 'value'],
    'medications': ['admission_id', 'time', 'code'],
    'diagnoses': ['admission_id', 'code'],
}

STATIC_COLUMNS = ['age', 'gender', 'weight', 'height']


class PreprocessConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    unit_hours: float = Field(default=24.0, gt=0.0)
    knn_k: int = Field(default=10, ge=1)
    min_age: float = 18.0
    max_missing: int = Field(default=10, ge=0)  # missing variables per admission, inclusive
    top_medications: int = Field(default=1000, ge=1)
    top_diseases: int = Field(default=2000, ge=1)
