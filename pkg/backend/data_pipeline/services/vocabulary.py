"""
Medication and disease vocabularies.

Codes are ranked by descending frequency, ties broken by the lexicographically
smaller code; only the top N are kept and get ids 0..N-1 in rank order.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Union

import pandas as pd

from core.exceptions import DataError, DataFormatError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Vocabulary:
    codes: List[str]

    @property
    def index(self) -> Dict[str, int]:
        return {code: i for i, code in enumerate(self.codes)}

    def __len__(self) -> int:
        return len(self.codes)

    def encode(self, codes: Iterable[str]) -> List[int]:
        """Sorted ids of the known codes; unknown codes are dropped."""
        index = self.index
        return sorted({index[code] for code in codes if code in index})


def build_vocabulary(occurrences: Iterable[str], top_n: int) -> Vocabulary:
    """
    Args:
        occurrences: every occurrence of every code
        top_n: codes to keep, >= 1

    >>> build_vocabulary(['b', 'a', 'b', 'c', 'a'], 2).codes
    ['a', 'b']
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    counts = Counter(occurrences)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    dropped = max(0, len(ranked) - top_n)
    if dropped:
        logger.info(f"Vocabulary keeps {top_n} of {len(ranked)} codes")
    return Vocabulary(codes=[code for code, _ in ranked[:top_n]])


def truncate_codes(code_lists: Sequence[Sequence[str]], top_n: int):
    """Vocabulary over ``code_lists`` plus every list re-encoded as ids."""
    vocabulary = build_vocabulary((code for codes in code_lists for code in codes), top_n)
    return vocabulary, [vocabulary.encode(codes) for codes in code_lists]


def load_category_map(path: Union[str, Path]) -> Dict[str, str]:
    """Read a ``code,category`` CSV."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"category map not found: {path}")
    frame = pd.read_csv(path, dtype=str, encoding='utf-8')
    if list(frame.columns[:2]) != ['code', 'category']:
        raise DataFormatError("expected columns code,category", path=path, line_number=1)
    duplicated = frame['code'].duplicated()
    if duplicated.any():
        raise DataFormatError(
            f"code {frame.loc[duplicated, 'code'].iloc[0]!r} mapped twice",
            path=path, line_number=int(duplicated.idxmax()) + 2,
        )
    return dict(zip(frame['code'], frame['category']))


def apply_category_map(codes: Sequence[str], mapping: Mapping[str, str]) -> List[str]:
    """Replace codes by their category; unmapped codes stay as they are. Duplicates collapse."""
    mapped = []
    for code in codes:
        category = mapping.get(code, code)
        if category not in mapped:
            mapped.append(category)
    return mapped
