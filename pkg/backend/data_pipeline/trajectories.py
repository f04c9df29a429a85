"""
In-memory trajectories and the JSONL reader/writer.

A Trajectory holds one admission as dense arrays, the form the encoder,
trainer and evaluator consume. Floats are written with Python's shortest
round-trip repr, so write -> read reproduces every value exactly.
"""
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from core.exceptions import DataError, DataFormatError, DimensionError, EmptyInputError
from data_pipeline.schemas import AdmissionRecord, DatasetManifest, UnitRecord

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.meta.json'


@dataclass
class Trajectory:
    """
    One admission.

    Attributes:
        admission_id: identifier carried through every output
        static: demographics in manifest ``static_fields`` order, shape (S,)
        diseases: disease multi-hot, shape (D,)
        observations: time-series features, shape (T, F); NaN marks missing
        actions: doctor prescriptions as 0/1, shape (T, K)
        rewards: per-step rewards, shape (T,)
        survived: discharge outcome
    """

    admission_id: str
    static: np.ndarray
    diseases: np.ndarray
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    survived: bool

    def __post_init__(self):
        self.static = np.asarray(self.static, dtype=np.float64).reshape(-1)
        self.diseases = np.asarray(self.diseases, dtype=np.float64).reshape(-1)
        self.observations = np.asarray(self.observations, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
        if self.observations.ndim != 2 or self.observations.shape[0] == 0:
            raise EmptyInputError(f"admission {self.admission_id} has no time steps")
        length = self.observations.shape[0]
        if self.actions.ndim != 2 or self.actions.shape[0] != length or self.rewards.shape[0] != length:
            raise DimensionError(
                f"admission {self.admission_id}: observations {self.observations.shape}, "
                f"actions {self.actions.shape} and rewards {self.rewards.shape} disagree on length"
            )

    @property
    def length(self) -> int:
        return self.observations.shape[0]

    @property
    def died(self) -> bool:
        return not self.survived

    @property
    def n_medications(self) -> int:
        return self.actions.shape[1]

    @property
    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.observations)) and np.all(np.isfinite(self.static)))

    def prefix(self, steps: int) -> 'Trajectory':
        """The first ``steps`` units of the admission."""
        if not 1 <= steps <= self.length:
            raise ValueError(f"prefix of {steps} steps out of range for length {self.length}")
        return replace(
            self,
            observations=self.observations[:steps],
            actions=self.actions[:steps],
            rewards=self.rewards[:steps],
        )


@dataclass
class Dataset:
    trajectories: List[Trajectory]
    manifest: DatasetManifest
    path: Optional[Path] = None

    def __len__(self) -> int:
        return len(self.trajectories)


def manifest_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    stem = path.name[:-len('.jsonl')] if path.name.endswith('.jsonl') else path.name
    return path.with_name(stem + MANIFEST_SUFFIX)


def record_to_trajectory(record: AdmissionRecord, manifest: DatasetManifest) -> Trajectory:
    """Densify a validated record against the manifest layout."""
    missing = [name for name in manifest.static_fields if name not in record.static]
    extra = [name for name in record.static if name not in manifest.static_fields]
    if missing or extra:
        raise ValueError(f"static fields missing {missing} / unexpected {extra}")
    static = [np.nan if record.static[name] is None else record.static[name] for name in manifest.static_fields]

    diseases = np.zeros(manifest.n_diseases)
    for disease_id in record.diseases:
        if not 0 <= disease_id < manifest.n_diseases:
            raise ValueError(f"disease id {disease_id} outside [0, {manifest.n_diseases})")
        diseases[disease_id] = 1.0

    n_series = len(manifest.series_fields)
    observations = np.empty((len(record.units), n_series))
    actions = np.zeros((len(record.units), manifest.n_medications))
    rewards = np.empty(len(record.units))
    for row, unit in enumerate(record.units):
        if len(unit.obs) != n_series:
            raise ValueError(f"unit {unit.t} has {len(unit.obs)} observations, expected {n_series}")
        observations[row] = [np.nan if v is None else v for v in unit.obs]
        for med_id in unit.meds:
            if not 0 <= med_id < manifest.n_medications:
                raise ValueError(f"medication id {med_id} outside [0, {manifest.n_medications})")
            actions[row, med_id] = 1.0
        rewards[row] = unit.reward

    return Trajectory(
        admission_id=record.id,
        static=np.asarray(static, dtype=np.float64),
        diseases=diseases,
        observations=observations,
        actions=actions,
        rewards=rewards,
        survived=record.survived,
    )


def _optional_float(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def trajectory_to_record(trajectory: Trajectory, manifest: DatasetManifest) -> AdmissionRecord:
    units = [
        UnitRecord(
            t=t,
            obs=[_optional_float(v) for v in trajectory.observations[t]],
            meds=[int(k) for k in np.flatnonzero(trajectory.actions[t] > 0.5)],
            reward=float(trajectory.rewards[t]),
        )
        for t in range(trajectory.length)
    ]
    return AdmissionRecord(
        id=str(trajectory.admission_id),
        static={name: _optional_float(v) for name, v in zip(manifest.static_fields, trajectory.static)},
        diseases=[int(d) for d in np.flatnonzero(trajectory.diseases > 0.5)],
        units=units,
        survived=bool(trajectory.survived),
    )


def write_manifest(path: Union[str, Path], manifest: DatasetManifest) -> Path:
    target = manifest_path(path)
    target.write_text(
        json.dumps(manifest.model_dump(mode='json'), indent=2, sort_keys=True) + '\n',
        encoding='utf-8',
    )
    return target


def read_manifest(path: Union[str, Path]) -> DatasetManifest:
    target = manifest_path(path)
    if not target.exists():
        raise DataError(f"dataset manifest not found: {target}")
    try:
        return DatasetManifest.model_validate_json(target.read_text(encoding='utf-8'))
    except ValidationError as e:
        raise DataFormatError(f"invalid manifest: {e.errors()[0]['msg']}", path=target)


def write_records(path: Union[str, Path], records: Iterable[AdmissionRecord], manifest: DatasetManifest) -> int:
    """Write admission records as JSONL plus the manifest; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for record in records:
            handle.write(json.dumps(record.model_dump(mode='json'), separators=(',', ':')))
            handle.write('\n')
            count += 1
    write_manifest(path, manifest)
    logger.info(f"Wrote {count} admissions to {path}")
    return count


def write_trajectories(path: Union[str, Path], trajectories: Sequence[Trajectory],
                       manifest: DatasetManifest) -> int:
    return write_records(path, (trajectory_to_record(t, manifest) for t in trajectories), manifest)


def iter_records(path: Union[str, Path]) -> Iterable[Tuple[int, AdmissionRecord]]:
    """Yield (line number, record); malformed lines raise DataFormatError with their line number."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"trajectory file not found: {path}")
    with path.open('r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataFormatError(f"invalid JSON: {e.msg}", path=path, line_number=line_number)
            try:
                yield line_number, AdmissionRecord.model_validate(payload)
            except ValidationError as e:
                first = e.errors()[0]
                location = '.'.join(str(part) for part in first['loc'])
                raise DataFormatError(f"{location}: {first['msg']}", path=path, line_number=line_number)


def read_records(path: Union[str, Path]) -> Tuple[List[AdmissionRecord], DatasetManifest]:
    manifest = read_manifest(path)
    return [record for _, record in iter_records(path)], manifest


def read_trajectories(path: Union[str, Path], require_complete: bool = False) -> Dataset:
    """
    Load a trajectory JSONL file with its manifest.

    Args:
        path: JSONL file
        require_complete: raise DataFormatError on any missing value
            (training and evaluation need imputed data)
    """
    path = Path(path)
    manifest = read_manifest(path)
    trajectories: List[Trajectory] = []
    for line_number, record in iter_records(path):
        try:
            trajectory = record_to_trajectory(record, manifest)
        except (ValueError, DataError) as e:
            raise DataFormatError(str(e), path=path, line_number=line_number)
        if require_complete and not trajectory.is_complete:
            raise DataFormatError(
                f"admission {record.id} has missing values; run preprocess first",
                path=path, line_number=line_number,
            )
        trajectories.append(trajectory)
    if not trajectories:
        raise EmptyInputError(f"no admissions in {path}")
    logger.info(f"Loaded {len(trajectories)} admissions from {path}")
    return Dataset(trajectories=trajectories, manifest=manifest, path=path)
