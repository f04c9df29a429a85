"""
Checkpoint files.

A checkpoint is one UTF-8 JSON document:

    {
      "format_version": 1,
      "architecture": {...},
      "blocks": {"<group>.<block>": {"shape": [...], "data": [...]}, ...},
      "state": {"epochs_completed": n, "trace": [...], ...}
    }

Groups are ``policy``, ``critic``, ``target_policy``, ``target_critic`` and
``normalizer``. Data is the row-major flattening of each block written with
Python's shortest round-trip float repr, so loading reproduces every
parameter bit for bit.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import numpy as np

from core.exceptions import DataError, DataFormatError, DimensionError
from core.params import ParamSet, check_congruent, prefixed, unprefixed
from networks.architecture import Architecture
from networks.bundle import NetworkBundle
from networks.encoder import InputNormalizer
from networks.targets import TargetPair

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
CHECKPOINT_FILENAME = 'checkpoint.json'


@dataclass
class Checkpoint:
    bundle: NetworkBundle
    state: Dict[str, Any] = field(default_factory=dict)

    @property
    def epochs_completed(self) -> int:
        return int(self.state.get('epochs_completed', 0))


def _encode_blocks(params: Mapping[str, np.ndarray]) -> Dict[str, Dict[str, Any]]:
    return {
        name: {'shape': list(np.shape(value)), 'data': np.asarray(value, dtype=np.float64).ravel().tolist()}
        for name, value in params.items()
    }


def _decode_blocks(blocks: Mapping[str, Any], path: Path) -> ParamSet:
    params: ParamSet = {}
    for name, block in blocks.items():
        try:
            shape = tuple(int(n) for n in block['shape'])
            data = np.asarray(block['data'], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise DataFormatError(f"block '{name}' is malformed: {e}", path=path)
        if data.size != int(np.prod(shape)):
            raise DataFormatError(f"block '{name}' has {data.size} values for shape {shape}", path=path)
        params[name] = data.reshape(shape)
    return params


def resolve_checkpoint_path(path: Union[str, Path]) -> Path:
    """Accept either a checkpoint file or the run directory containing one."""
    path = Path(path)
    return path / CHECKPOINT_FILENAME if path.is_dir() else path


def save_checkpoint(path: Union[str, Path], bundle: NetworkBundle, state: Mapping[str, Any] = None) -> Path:
    path = resolve_checkpoint_path(path)
    blocks: ParamSet = {
        **prefixed('policy', bundle.policy.params),
        **prefixed('critic', bundle.critic.params),
        **prefixed('target_policy', bundle.targets.policy.params),
        **prefixed('target_critic', bundle.targets.critic.params),
        **prefixed('normalizer', bundle.normalizer.to_blocks()),
    }
    payload = {
        'format_version': FORMAT_VERSION,
        'architecture': bundle.architecture.to_dict(),
        'blocks': _encode_blocks(blocks),
        'state': dict(state or {}),
    }
    tmp = path.with_suffix('.json.tmp')
    tmp.write_text(json.dumps(payload), encoding='utf-8')
    tmp.replace(path)
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = resolve_checkpoint_path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON: {e.msg}", path=path, line_number=e.lineno)

    version = payload.get('format_version')
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported checkpoint format_version {version!r}", path=path)

    try:
        architecture = Architecture.from_dict(payload['architecture'])
    except (KeyError, TypeError) as e:
        raise DataFormatError(f"invalid architecture section: {e}", path=path)
    blocks = _decode_blocks(payload.get('blocks', {}), path)

    try:
        normalizer = InputNormalizer.from_blocks(unprefixed('normalizer', blocks))
    except KeyError as e:
        raise DataFormatError(f"missing normalizer block {e}", path=path)
    template = NetworkBundle.initialize(architecture, 0, normalizer)
    groups = {
        'policy': template.policy.params,
        'target_policy': template.policy.params,
        'critic': template.critic.params,
        'target_critic': template.critic.params,
    }
    for group, expected in groups.items():
        try:
            check_congruent(expected, unprefixed(group, blocks), f"checkpoint {group} blocks")
        except DimensionError as e:
            raise DataFormatError(str(e), path=path)

    policy = template.policy.with_params(unprefixed('policy', blocks))
    critic = template.critic.with_params(unprefixed('critic', blocks))
    target_policy = template.policy.with_params(unprefixed('target_policy', blocks))
    target_critic = template.critic.with_params(unprefixed('target_critic', blocks))
    return Checkpoint(
        bundle=NetworkBundle(architecture, policy, critic, TargetPair(target_policy, target_critic)),
        state=payload.get('state', {}),
    )
