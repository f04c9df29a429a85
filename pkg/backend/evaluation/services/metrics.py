"""
Evaluation metrics for treatment recommendation.

- mean Jaccard between recommended and prescribed medication sets,
  averaged over days within a patient and then over patients
- estimated in-hospital mortality read off a Q-value / mortality curve
- mortality as a function of the treatment difference (Hamming distance
  between recommendation and prescription)
- discounted returns of logged reward sequences
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Set, Union

import numpy as np
from scipy.stats import spearmanr

from core.exceptions import DimensionError, EmptyInputError

logger = logging.getLogger(__name__)

MedicationDays = Union[np.ndarray, Sequence[Iterable[int]]]


def _as_sets(days: MedicationDays) -> List[Set[int]]:
    """Per-day medication id sets from either a (T, K) 0/1 array or a list of id collections."""
    if isinstance(days, np.ndarray):
        if days.ndim != 2:
            raise DimensionError(f"binary prescriptions must be (T, K), got {days.shape}")
        return [set(np.flatnonzero(row > 0.5).tolist()) for row in days]
    return [set(int(k) for k in day) for day in days]


def jaccard(recommended: Set[int], prescribed: Set[int]) -> float:
    """|A n B| / |A u B|; two empty sets agree completely (1.0)."""
    union = recommended | prescribed
    if not union:
        return 1.0
    return len(recommended & prescribed) / len(union)


@dataclass
class JaccardReport:
    mean: float
    per_patient: List[float]
    aggregated: Optional[float] = None
    per_patient_aggregated: Optional[List[float]] = None


def _aligned_patients(recommended: Sequence[MedicationDays], prescribed: Sequence[MedicationDays]):
    if len(recommended) != len(prescribed):
        raise DimensionError(f"{len(recommended)} recommended patients vs {len(prescribed)} prescribed")
    if len(recommended) == 0:
        raise EmptyInputError("Jaccard needs at least one patient")
    pairs = []
    for index, (rec, doc) in enumerate(zip(recommended, prescribed)):
        rec_sets, doc_sets = _as_sets(rec), _as_sets(doc)
        if len(rec_sets) != len(doc_sets):
            raise DimensionError(f"patient {index}: {len(rec_sets)} recommended days vs {len(doc_sets)} prescribed")
        if not rec_sets:
            raise EmptyInputError(f"patient {index} has no days")
        pairs.append((rec_sets, doc_sets))
    return pairs


def mean_jaccard(recommended: Sequence[MedicationDays], prescribed: Sequence[MedicationDays]) -> JaccardReport:
    """
    (1/M) sum_i (1/T_i) sum_t |rec_it n doc_it| / |rec_it u doc_it|

    >>> mean_jaccard([[{1, 2, 3}]], [[{2, 3, 4}]]).mean
    0.5
    """
    per_patient = [
        float(np.mean([jaccard(r, d) for r, d in zip(rec_sets, doc_sets)]))
        for rec_sets, doc_sets in _aligned_patients(recommended, prescribed)
    ]
    return JaccardReport(mean=float(np.mean(per_patient)), per_patient=per_patient)


def aggregated_jaccards(recommended: Sequence[MedicationDays], prescribed: Sequence[MedicationDays]) -> List[float]:
    """Per patient, the Jaccard between everything recommended and everything prescribed over the admission."""
    return [
        jaccard(set().union(*rec_sets), set().union(*doc_sets))
        for rec_sets, doc_sets in _aligned_patients(recommended, prescribed)
    ]


def aggregated_jaccard(recommended: Sequence[MedicationDays], prescribed: Sequence[MedicationDays]) -> float:
    return float(np.mean(aggregated_jaccards(recommended, prescribed)))


# ---------------------------------------------------------------------------
# Q-value binned mortality
# ---------------------------------------------------------------------------

@dataclass
class MortalityCurve:
    """Equal-width bins over Q with the observed death rate in each bin."""

    edges: np.ndarray
    rates: np.ndarray  # NaN for bins without support
    supports: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def filled_rates(self) -> np.ndarray:
        """Empty bins take the rate of the nearest supported bin (lower bin on ties)."""
        supported = np.flatnonzero(self.supports > 0)
        filled = self.rates.copy()
        for index in np.flatnonzero(self.supports == 0):
            nearest = supported[np.argmin(np.abs(supported - index))]
            filled[index] = self.rates[nearest]
        return filled

    def rate_at(self, q: float) -> float:
        """Linear interpolation between bin centers, flat beyond the end bins, clamped to [0, 1]."""
        return float(np.clip(np.interp(q, self.centers, self.filled_rates), 0.0, 1.0))

    def trend(self, min_support: int = 30) -> float:
        """Spearman rank correlation between bin center and rate over well supported bins."""
        mask = self.supports >= min_support
        if mask.sum() < 2:
            return float('nan')
        rho, _ = spearmanr(self.centers[mask], self.rates[mask])
        return float(rho)


def _flatten_q(q_values: Sequence[np.ndarray], died: Sequence[bool]):
    if len(q_values) != len(died):
        raise DimensionError(f"{len(q_values)} Q sequences vs {len(died)} outcomes")
    samples, labels = [], []
    for q, dead in zip(q_values, died):
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        samples.append(q)
        labels.append(np.full(q.shape[0], 1.0 if dead else 0.0))
    if not samples or sum(s.size for s in samples) == 0:
        raise EmptyInputError("mortality estimation needs at least one Q sample")
    return np.concatenate(samples), np.concatenate(labels)


def mortality_curve(q_values: Sequence[np.ndarray], died: Sequence[bool], bins: int = 50) -> MortalityCurve:
    """
    Bin every step's Q value; each sample carries its admission's death flag.

    Args:
        q_values: one array of per-step Q values per admission
        died: death flag per admission
        bins: number of equal-width bins, >= 2
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    samples, labels = _flatten_q(q_values, died)
    low, high = float(samples.min()), float(samples.max())
    if high == low:
        low, high = low - 0.5, high + 0.5
    edges = np.linspace(low, high, bins + 1)
    index = np.clip(np.searchsorted(edges, samples, side='right') - 1, 0, bins - 1)
    supports = np.bincount(index, minlength=bins)
    deaths = np.bincount(index, weights=labels, minlength=bins)
    with np.errstate(invalid='ignore', divide='ignore'):
        rates = np.where(supports > 0, deaths / np.maximum(supports, 1), np.nan)
    return MortalityCurve(edges=edges, rates=rates, supports=supports)


@dataclass
class MortalityEstimate:
    rate: float
    expected_q: float
    curve: MortalityCurve


def estimated_mortality(q_values: Sequence[np.ndarray], died: Sequence[bool], policy_expected_q: float,
                        bins: int = 50) -> MortalityEstimate:
    """Mortality rate read off the Q/mortality curve at the policy's expected Q."""
    curve = mortality_curve(q_values, died, bins)
    return MortalityEstimate(rate=curve.rate_at(policy_expected_q), expected_q=float(policy_expected_q), curve=curve)


# ---------------------------------------------------------------------------
# Treatment difference
# ---------------------------------------------------------------------------

def hamming_distances(recommended: np.ndarray, prescribed: np.ndarray) -> np.ndarray:
    """D_t = sum_k |U_tk - U^_tk| per step."""
    recommended = np.asarray(recommended, dtype=np.float64)
    prescribed = np.asarray(prescribed, dtype=np.float64)
    if recommended.shape != prescribed.shape:
        raise DimensionError(f"recommended {recommended.shape} vs prescribed {prescribed.shape}")
    return np.rint(np.abs(recommended - prescribed).sum(axis=-1)).astype(int)


@dataclass
class DifferenceCurve:
    differences: np.ndarray  # distinct observed D values, ascending
    rates: np.ndarray
    supports: np.ndarray


def difference_curve(recommended: Sequence[np.ndarray], prescribed: Sequence[np.ndarray],
                     died: Sequence[bool]) -> DifferenceCurve:
    """Observed mortality of the owning admission for the steps at each difference D."""
    if not len(recommended) == len(prescribed) == len(died):
        raise DimensionError(
            f"{len(recommended)} recommended, {len(prescribed)} prescribed, {len(died)} outcomes"
        )
    if len(recommended) == 0:
        raise EmptyInputError("difference curve needs at least one admission")
    distances = np.concatenate([hamming_distances(r, p) for r, p in zip(recommended, prescribed)])
    labels = np.concatenate([
        np.full(np.asarray(r).shape[0], 1.0 if dead else 0.0) for r, dead in zip(recommended, died)
    ])
    values, inverse = np.unique(distances, return_inverse=True)
    supports = np.bincount(inverse, minlength=values.size)
    deaths = np.bincount(inverse, weights=labels, minlength=values.size)
    return DifferenceCurve(differences=values, rates=deaths / supports, supports=supports)


# ---------------------------------------------------------------------------
# Returns
# ---------------------------------------------------------------------------

def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    """R_1 = sum_t gamma^(t-1) r_t."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    rewards = np.asarray(rewards, dtype=np.float64)
    return float(np.sum(np.power(gamma, np.arange(rewards.shape[0])) * rewards))


def expected_return(trajectories: Sequence, gamma: float) -> float:
    """Mean discounted return from the first step over trajectories (or reward sequences)."""
    if not len(trajectories):
        raise EmptyInputError("expected return needs at least one trajectory")
    return float(np.mean([
        discounted_return(getattr(item, 'rewards', item), gamma) for item in trajectories
    ]))
