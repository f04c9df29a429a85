"""
Preprocessing pipeline: raw extracts (or an existing trajectory file) to
complete trajectory JSONL.

    extracts ─ bin into units ─┐
                               ├─ filter cohort ─ map categories ─ truncate vocabularies ─ impute ─ records
    trajectory JSONL ──────────┘

Running the pipeline on its own output changes nothing.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from django.conf import settings

from core.exceptions import DataError, EmptyInputError
from data_pipeline.config.preprocess import STATIC_COLUMNS, PreprocessConfig
from data_pipeline.schemas import AdmissionRecord, DatasetManifest, UnitRecord
from data_pipeline.services.binning import bin_to_units
from data_pipeline.services.cohort_filter import NO_MEASUREMENTS, ExclusionReport, filter_cohort
from data_pipeline.services.extracts import read_extracts
from data_pipeline.services.imputation import impute_knn
from data_pipeline.services.vocabulary import apply_category_map, load_category_map, truncate_codes
from data_pipeline.trajectories import Dataset, read_trajectories, write_records

logger = logging.getLogger(__name__)

PREPROCESSED_SOURCE = 'preprocess'
EXCLUSIONS_FILENAME = 'exclusions.csv'


@dataclass
class AdmissionDraft:
    """An admission between pipeline stages: codes still strings, values possibly missing."""

    admission_id: str
    static: Dict[str, Optional[float]]
    diseases: List[str]
    observations: np.ndarray  # (T, F), NaN = missing
    medications: List[List[str]]  # per unit
    survived: bool

    @property
    def missing_variables(self) -> int:
        return int(np.sum(np.isnan(self.observations).all(axis=0)))

    @property
    def has_measurements(self) -> bool:
        return bool((~np.isnan(self.observations)).any())


@dataclass
class PreprocessResult:
    records: List[AdmissionRecord]
    manifest: DatasetManifest
    report: ExclusionReport


def drafts_from_extracts(directory: Union[str, Path], unit_hours: float) -> Tuple[List[AdmissionDraft], List[str]]:
    records = read_extracts(directory)
    variables = sorted({v for r in records for v in r.measurements['variable'].unique()})
    drafts = []
    for record in records:
        if record.measurements.empty:
            observations = np.full((1, len(variables)), np.nan)
            medications = [[]]
        else:
            series = bin_to_units(record, variables, unit_hours)
            observations, medications = series.values, series.medications
        drafts.append(AdmissionDraft(
            admission_id=record.admission_id,
            static=dict(record.static),
            diseases=sorted(set(record.diagnoses)),
            observations=observations,
            medications=medications,
            survived=record.survived,
        ))
    return drafts, variables


def drafts_from_dataset(dataset: Dataset) -> List[AdmissionDraft]:
    manifest = dataset.manifest
    med_codes = manifest.medication_vocab or [str(k) for k in range(manifest.n_medications)]
    disease_codes = manifest.disease_vocab or [str(d) for d in range(manifest.n_diseases)]
    return [
        AdmissionDraft(
            admission_id=t.admission_id,
            static={
                name: (None if np.isnan(value) else float(value))
                for name, value in zip(manifest.static_fields, t.static)
            },
            diseases=[disease_codes[d] for d in np.flatnonzero(t.diseases > 0.5)],
            observations=t.observations.copy(),
            medications=[[med_codes[k] for k in np.flatnonzero(row > 0.5)] for row in t.actions],
            survived=t.survived,
        )
        for t in dataset.trajectories
    ]


def fill_empty_units(observations: np.ndarray) -> np.ndarray:
    """Units without any reading take the nearest earlier unit's values (later unit for leading gaps)."""
    frame = pd.DataFrame(observations)
    empty = frame.isna().all(axis=1)
    if not empty.any():
        return observations
    carried = frame.ffill().bfill()
    frame.loc[empty] = carried.loc[empty]
    return frame.to_numpy(dtype=np.float64)


def impute_series(drafts: Sequence[AdmissionDraft], k: int, variables: Sequence[str]) -> List[np.ndarray]:
    """kNN imputation over the unit rows of all admissions together."""
    blocks = [fill_empty_units(d.observations) for d in drafts]
    completed = impute_knn(np.concatenate(blocks), k, variables)
    bounds = np.cumsum([0] + [b.shape[0] for b in blocks])
    return [completed[start:end] for start, end in zip(bounds[:-1], bounds[1:])]


def impute_static(drafts: Sequence[AdmissionDraft], k: int, fields: Sequence[str]) -> np.ndarray:
    matrix = np.array(
        [[np.nan if d.static.get(name) is None else d.static[name] for name in fields] for d in drafts],
        dtype=np.float64,
    ).reshape(len(drafts), len(fields))
    if matrix.size == 0:
        return matrix
    return impute_knn(matrix, k, fields)


def preprocess_drafts(drafts: Sequence[AdmissionDraft], static_fields: Sequence[str], series_fields: Sequence[str],
                      config: PreprocessConfig, category_map: Optional[Mapping[str, str]] = None) -> PreprocessResult:
    """Filter, re-encode and impute admissions into interchange records."""
    measured = [d for d in drafts if d.has_measurements]
    unmeasured = [(d.admission_id, NO_MEASUREMENTS) for d in drafts if not d.has_measurements]
    kept, report = filter_cohort(
        measured,
        admission_id=lambda d: d.admission_id,
        age=lambda d: d.static.get('age'),
        missing_variables=lambda d: d.missing_variables,
        min_age=config.min_age,
        max_missing=config.max_missing,
    )
    report.excluded = unmeasured + report.excluded
    if not kept:
        raise EmptyInputError("no admission passed the cohort filter")

    medications = [
        [apply_category_map(codes, category_map) if category_map else list(codes) for codes in d.medications]
        for d in kept
    ]
    med_vocab, _ = truncate_codes([codes for units in medications for codes in units], config.top_medications)
    disease_vocab, disease_ids = truncate_codes([d.diseases for d in kept], config.top_diseases)
    if len(med_vocab) == 0:
        raise DataError("no medication events in the retained admissions")

    observations = impute_series(kept, config.knn_k, series_fields)
    static = impute_static(kept, config.knn_k, static_fields)
    rewards = settings.TREATREC_DEFAULTS

    records = []
    for i, draft in enumerate(kept):
        length = observations[i].shape[0]
        records.append(AdmissionRecord(
            id=draft.admission_id,
            static={name: float(static[i, j]) for j, name in enumerate(static_fields)},
            diseases=disease_ids[i],
            units=[
                UnitRecord(
                    t=t,
                    obs=[float(v) for v in observations[i][t]],
                    meds=med_vocab.encode(medications[i][t]),
                    reward=(rewards['reward_survived'] if draft.survived else rewards['reward_died'])
                    if t == length - 1 else 0.0,
                )
                for t in range(length)
            ],
            survived=draft.survived,
        ))

    manifest = DatasetManifest(
        n_medications=len(med_vocab),
        n_diseases=len(disease_vocab),
        static_fields=list(static_fields),
        series_fields=list(series_fields),
        medication_vocab=med_vocab.codes,
        disease_vocab=disease_vocab.codes,
        source=PREPROCESSED_SOURCE,
    )
    logger.info(
        f"Preprocessed {len(records)} admissions: K={manifest.n_medications} "
        f"diseases={manifest.n_diseases} features={len(series_fields)}",
        extra={'admissions': len(records), **report.counts},
    )
    return PreprocessResult(records=records, manifest=manifest, report=report)


def preprocess(source: Union[str, Path], config: PreprocessConfig,
               category_map_path: Optional[Union[str, Path]] = None) -> PreprocessResult:
    """
    Args:
        source: directory of CSV extracts, or a trajectory JSONL file
        config: unit length, kNN k, cohort limits and vocabulary sizes
        category_map_path: optional ``code,category`` CSV applied to medications
    """
    source = Path(source)
    category_map = load_category_map(category_map_path) if category_map_path else None
    if source.is_dir():
        drafts, variables = drafts_from_extracts(source, config.unit_hours)
        static_fields = STATIC_COLUMNS
    else:
        dataset = read_trajectories(source)
        drafts, variables = drafts_from_dataset(dataset), dataset.manifest.series_fields
        static_fields = dataset.manifest.static_fields
    if not variables:
        raise DataError(f"no time-series variables in {source}")
    return preprocess_drafts(drafts, static_fields, variables, config, category_map)


def write_result(result: PreprocessResult, output: Union[str, Path],
                 exclusions: Optional[Union[str, Path]] = None) -> int:
    count = write_records(output, result.records, result.manifest)
    if exclusions is not None:
        pd.DataFrame(result.report.excluded, columns=['admission_id', 'reason']).to_csv(
            exclusions, index=False, lineterminator='\n',
        )
    return count
