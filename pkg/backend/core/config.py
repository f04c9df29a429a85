"""
Config file loading with flag overrides.

A config file is a JSON document whose top-level keys are the sections of
a pydantic model. Values resolve with the precedence

    command-line flags > config file > model defaults

Overrides are given as dotted paths (``train.epsilon``) so a flag can
address any nested field.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

ModelT = TypeVar('ModelT', bound=BaseModel)


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}:{e.lineno}: invalid JSON ({e.msg})")
    if not isinstance(payload, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return payload


def set_dotted(payload: Dict[str, Any], dotted: str, value: Any):
    *parents, leaf = dotted.split('.')
    node = payload
    for key in parents:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"cannot set {dotted}: {key} is not a section")
        node = child
    node[leaf] = value


def merge_overrides(payload: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Apply dotted-path overrides; ``None`` values mean "flag not given" and are skipped."""
    merged = json.loads(json.dumps(payload))
    for dotted, value in overrides.items():
        if value is not None:
            set_dotted(merged, dotted, value)
    return merged


def format_validation_error(error: ValidationError) -> str:
    problems = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<root>'
        problems.append(f"{location}: {item['msg']}")
    return '; '.join(problems)


def load_config(model: Type[ModelT], path: Optional[Union[str, Path]] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> ModelT:
    """
    Build a validated config.

    Args:
        model: pydantic model class describing the whole document
        path: optional JSON config file
        overrides: dotted-path values from command-line flags

    Raises:
        ConfigurationError: unreadable file, unknown keys or invalid values
    """
    payload = read_config_file(path) if path is not None else {}
    payload = merge_overrides(payload, overrides or {})
    try:
        config = model.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {format_validation_error(e)}")
    logger.debug(f"Resolved {model.__name__} from {path or 'defaults'}")
    return config
