"""
CSV extract reader.

Loads the four extract files described in ``data_pipeline.config.preprocess``
and groups them into one RawRecord per admission.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from core.exceptions import DataError, DataFormatError
from data_pipeline.config.preprocess import EXTRACT_COLUMNS, STATIC_COLUMNS

logger = logging.getLogger(__name__)


@dataclass
class RawRecord:
    """
    One admission as extracted: timestamped events plus demographics.

    ``measurements`` has columns (time, variable, value) and ``medications``
    (time, code); both are sorted by time.
    """

    admission_id: str
    admit_time: pd.Timestamp
    discharge_time: Optional[pd.Timestamp]
    static: Dict[str, Optional[float]]
    survived: bool
    measurements: pd.DataFrame
    medications: pd.DataFrame
    diagnoses: List[str] = field(default_factory=list)


def read_extract(directory: Union[str, Path], name: str) -> pd.DataFrame:
    path = Path(directory) / f"{name}.csv"
    if not path.exists():
        raise DataError(f"extract file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={'admission_id': str, 'code': str, 'variable': str}, encoding='utf-8')
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataFormatError(f"unreadable CSV ({e})", path=path)
    missing = [column for column in EXTRACT_COLUMNS[name] if column not in frame.columns]
    if missing:
        raise DataFormatError(f"missing columns {missing}", path=path, line_number=1)
    for column in ('time', 'admit_time', 'discharge_time'):
        if column in frame.columns:
            parsed = pd.to_datetime(frame[column], errors='coerce')
            bad = parsed.isna() & frame[column].notna()
            if bad.any():
                # header is line 1
                raise DataFormatError(
                    f"unparseable {column} {frame.loc[bad, column].iloc[0]!r}",
                    path=path, line_number=int(bad.idxmax()) + 2,
                )
            frame[column] = parsed
    if 'value' in frame.columns:
        frame['value'] = pd.to_numeric(frame['value'], errors='coerce')
    return frame


def read_extracts(directory: Union[str, Path]) -> List[RawRecord]:
    """Read ``admissions/measurements/medications/diagnoses.csv`` from ``directory``."""
    admissions = read_extract(directory, 'admissions')
    measurements = read_extract(directory, 'measurements').dropna(subset=['time', 'value'])
    medications = read_extract(directory, 'medications').dropna(subset=['time', 'code'])
    diagnoses = read_extract(directory, 'diagnoses').dropna(subset=['code'])

    known = set(admissions['admission_id'])
    orphans = (set(measurements['admission_id']) | set(medications['admission_id'])) - known
    if orphans:
        logger.warning(f"Ignoring events of {len(orphans)} admissions missing from admissions.csv")

    measurements_by_id = {key: group for key, group in measurements.groupby('admission_id', sort=False)}
    medications_by_id = {key: group for key, group in medications.groupby('admission_id', sort=False)}
    diagnoses_by_id = diagnoses.groupby('admission_id', sort=False)['code'].apply(list).to_dict()

    empty_measurements = pd.DataFrame(columns=['time', 'variable', 'value'])
    empty_medications = pd.DataFrame(columns=['time', 'code'])
    records = []
    for row in admissions.itertuples(index=False):
        admission_id = str(row.admission_id)
        static = {
            name: (None if pd.isna(getattr(row, name)) else float(getattr(row, name)))
            for name in STATIC_COLUMNS
        }
        events = measurements_by_id.get(admission_id, empty_measurements)
        meds = medications_by_id.get(admission_id, empty_medications)
        records.append(RawRecord(
            admission_id=admission_id,
            admit_time=row.admit_time,
            discharge_time=None if pd.isna(row.discharge_time) else row.discharge_time,
            static=static,
            survived=bool(int(row.survived)),
            measurements=events[['time', 'variable', 'value']].sort_values('time', kind='stable').reset_index(drop=True),
            medications=meds[['time', 'code']].sort_values('time', kind='stable').reset_index(drop=True),
            diagnoses=[str(code) for code in diagnoses_by_id.get(admission_id, [])],
        ))
    logger.info(f"Read {len(records)} admissions from {directory}")
    return records
