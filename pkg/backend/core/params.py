"""
Parameter sets: ordered mappings from block name to float64 array.

Gradients use the same type and must be shape-congruent with the
parameters they differentiate.
"""
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from core.exceptions import DimensionError, NumericalError

ParamSet = Dict[str, np.ndarray]


def copy_params(params: Mapping[str, np.ndarray]) -> ParamSet:
    return {name: np.array(value, dtype=np.float64, copy=True) for name, value in params.items()}


def zeros_like(params: Mapping[str, np.ndarray]) -> ParamSet:
    return {name: np.zeros_like(value) for name, value in params.items()}


def prefixed(prefix: str, params: Mapping[str, np.ndarray]) -> ParamSet:
    return {f"{prefix}.{name}": value for name, value in params.items()}


def unprefixed(prefix: str, params: Mapping[str, np.ndarray]) -> ParamSet:
    head = f"{prefix}."
    return {name[len(head):]: value for name, value in params.items() if name.startswith(head)}


def check_congruent(a: Mapping[str, np.ndarray], b: Mapping[str, np.ndarray], what: str = 'parameter sets'):
    if list(a.keys()) != list(b.keys()):
        raise DimensionError(f"{what} have different blocks: {list(a.keys())} vs {list(b.keys())}")
    for name in a:
        if np.shape(a[name]) != np.shape(b[name]):
            raise DimensionError(
                f"{what} disagree on block '{name}': {np.shape(a[name])} vs {np.shape(b[name])}"
            )


def accumulate(total: ParamSet, grads: Mapping[str, np.ndarray], scale: float = 1.0) -> ParamSet:
    """In-place ``total += scale * grads``."""
    for name, value in grads.items():
        total[name] += scale * value
    return total


def sum_in_order(grad_sets: Iterable[Mapping[str, np.ndarray]], template: Mapping[str, np.ndarray]) -> ParamSet:
    """Sum gradient sets in iteration order; the fixed order keeps results bit-reproducible."""
    total = zeros_like(template)
    for grads in grad_sets:
        accumulate(total, grads)
    return total


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(grads: ParamSet, max_norm: Optional[float]) -> ParamSet:
    if max_norm is None:
        return grads
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        return {name: g * scale for name, g in grads.items()}
    return grads


def apply_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], step: float) -> ParamSet:
    """Return ``params + step * grads`` as a new set (step < 0 for descent)."""
    check_congruent(params, grads, 'parameters and gradients')
    updated = {name: params[name] + step * grads[name] for name in params}
    for name, value in updated.items():
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"parameter block '{name}' became non-finite after update")
    return updated


def flatten(params: Mapping[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([np.ravel(v) for v in params.values()]) if params else np.zeros(0)


def unflatten(vector: np.ndarray, template: Mapping[str, np.ndarray]) -> ParamSet:
    out: ParamSet = {}
    offset = 0
    for name, value in template.items():
        size = int(np.size(value))
        out[name] = np.asarray(vector[offset:offset + size], dtype=np.float64).reshape(np.shape(value))
        offset += size
    if offset != vector.size:
        raise DimensionError(f"flat vector has {vector.size} entries, template needs {offset}")
    return out
