"""
Time binning of raw admissions into fixed-length units.

Unit u covers ``[admit + u * unit, admit + (u + 1) * unit)``; the last unit
also includes the discharge instant. Several readings of one variable in a
unit are averaged; a unit without readings is missing (NaN) for that
variable. Events outside the admission window are dropped.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd

from core.exceptions import EmptyInputError
from data_pipeline.services.extracts import RawRecord

logger = logging.getLogger(__name__)


@dataclass
class UnitSeries:
    """
    A binned admission.

    Attributes:
        values: (n_units, F) unit means, NaN where a variable has no reading
        counts: (n_units, F) readings that contributed to each mean
        medications: per unit, the medication codes given during it
    """

    admission_id: str
    variables: List[str]
    values: np.ndarray
    counts: np.ndarray
    medications: List[List[str]]

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def missing_variables(self) -> int:
        """Variables never measured during the admission."""
        return int(np.sum(self.counts.sum(axis=0) == 0))


def unit_index(times: pd.Series, start: pd.Timestamp, unit: pd.Timedelta, n_units: int) -> np.ndarray:
    """Unit of every timestamp; -1 outside the window."""
    offsets = (times - start) / unit
    index = np.floor(offsets.to_numpy(dtype=np.float64)).astype(int)
    # the discharge instant closes the last unit
    index[(offsets.to_numpy(dtype=np.float64) == n_units)] = n_units - 1
    index[(index < 0) | (index >= n_units)] = -1
    return index


def bin_to_units(record: RawRecord, variables: Sequence[str], unit_hours: float = 24.0) -> UnitSeries:
    """
    Bin one admission.

    Args:
        record: raw admission with at least one measurement
        variables: time-series variables, in output column order
        unit_hours: unit length

    Raises:
        EmptyInputError: the admission has no measurements
    """
    if unit_hours <= 0:
        raise ValueError(f"unit_hours must be > 0, got {unit_hours}")
    if record.measurements.empty:
        raise EmptyInputError(f"admission {record.admission_id} has no measurements")
    unit = pd.Timedelta(hours=unit_hours)
    start = record.admit_time if not pd.isna(record.admit_time) else record.measurements['time'].min()
    end = record.discharge_time
    if end is None or pd.isna(end):
        end = max(record.measurements['time'].max(), record.medications['time'].max()
                  if not record.medications.empty else start)
    n_units = max(1, math.ceil((end - start) / unit))

    measurements = record.measurements.assign(
        unit=unit_index(record.measurements['time'], start, unit, n_units),
    )
    measurements = measurements[(measurements['unit'] >= 0) & measurements['variable'].isin(variables)]
    grouped = measurements.groupby(['unit', 'variable'])['value'].agg(['mean', 'count'])
    means = grouped['mean'].unstack('variable').reindex(index=range(n_units), columns=list(variables))
    counts = grouped['count'].unstack('variable').reindex(index=range(n_units), columns=list(variables)).fillna(0)

    medications: List[List[str]] = [[] for _ in range(n_units)]
    if not record.medications.empty:
        med_units = unit_index(record.medications['time'], start, unit, n_units)
        for u, code in zip(med_units, record.medications['code']):
            if u >= 0 and code not in medications[u]:
                medications[u].append(str(code))

    return UnitSeries(
        admission_id=record.admission_id,
        variables=list(variables),
        values=means.to_numpy(dtype=np.float64),
        counts=counts.to_numpy(dtype=np.int64),
        medications=[sorted(codes) for codes in medications],
    )
