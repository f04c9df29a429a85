"""
Cohort inclusion rules: adult patients with enough measured variables.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

logger = logging.getLogger(__name__)

A = TypeVar('A')

UNDER_AGE = 'under_age'
MISSING_AGE = 'missing_age'
TOO_MANY_MISSING = 'too_many_missing'
NO_MEASUREMENTS = 'no_measurements'
REASONS = (NO_MEASUREMENTS, MISSING_AGE, UNDER_AGE, TOO_MANY_MISSING)


@dataclass
class ExclusionReport:
    kept: int = 0
    excluded: List[Tuple[str, str]] = field(default_factory=list)  # (admission_id, reason)

    @property
    def counts(self) -> Dict[str, int]:
        tally = Counter(reason for _, reason in self.excluded)
        return {reason: tally.get(reason, 0) for reason in REASONS}


def exclusion_reason(age: Optional[float], missing_variables: int, min_age: float = 18.0,
                     max_missing: int = 10) -> Optional[str]:
    """
    None when the admission qualifies. Both limits are inclusive: age 18 with
    10 missing variables is kept.
    """
    if age is None:
        return MISSING_AGE
    if age < min_age:
        return UNDER_AGE
    if missing_variables > max_missing:
        return TOO_MANY_MISSING
    return None


def filter_cohort(admissions: Sequence[A], admission_id: Callable[[A], str], age: Callable[[A], Optional[float]],
                  missing_variables: Callable[[A], int], min_age: float = 18.0,
                  max_missing: int = 10) -> Tuple[List[A], ExclusionReport]:
    """
    Keep qualifying admissions, in input order.

    The accessors let the same rules run on binned extracts and on
    trajectory files.
    """
    kept: List[A] = []
    report = ExclusionReport()
    for admission in admissions:
        reason = exclusion_reason(age(admission), missing_variables(admission), min_age, max_missing)
        if reason is None:
            kept.append(admission)
        else:
            report.excluded.append((admission_id(admission), reason))
    report.kept = len(kept)
    logger.info(
        f"Cohort filter kept {report.kept} of {len(admissions)} admissions",
        extra={'kept': report.kept, **report.counts},
    )
    return kept, report
