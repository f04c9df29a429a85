"""
Run directories for command outputs.

Every command writes into ``<root>/<command>-<UTC timestamp>`` (or an
explicit directory). A ``.partial`` marker exists from creation until the
command finishes successfully, so interrupted or failed runs are never
mistaken for complete ones.
"""
import json
import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

from django.conf import settings

logger = logging.getLogger(__name__)

PARTIAL_MARKER = '.partial'


class RunDirectory:
    """A directory holding one command's outputs plus its config snapshot."""

    def __init__(self, path: Path):
        self.path = Path(path)

    @classmethod
    def create(cls, command: str, output: Optional[Union[str, Path]] = None) -> 'RunDirectory':
        """
        Create the run directory and its ``.partial`` marker.

        Args:
            command: command name used as the directory prefix
            output: explicit directory; defaults to a timestamped directory
                under settings.OUTPUT_ROOT
        """
        if output is None:
            stamp = datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%fZ')
            path = Path(settings.OUTPUT_ROOT) / f"{command}-{stamp}"
        else:
            path = Path(output)
        path.mkdir(parents=True, exist_ok=True)
        (path / PARTIAL_MARKER).write_text(f"{command} started\n", encoding='utf-8')
        logger.info(f"Run directory {path}")
        return cls(path)

    def file(self, name: str) -> Path:
        return self.path / name

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        target = self.file(name)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        return target

    def write_config(self, config) -> Path:
        """Snapshot the fully resolved config (pydantic model or dict)."""
        payload = config.model_dump(mode='json') if hasattr(config, 'model_dump') else dict(config)
        return self.write_json('config.json', payload)

    @property
    def is_partial(self) -> bool:
        return self.file(PARTIAL_MARKER).exists()

    def complete(self):
        marker = self.file(PARTIAL_MARKER)
        if marker.exists():
            marker.unlink()


@contextmanager
def run_directory(command: str, output: Optional[Union[str, Path]] = None) -> Iterator[RunDirectory]:
    """Context manager that removes the ``.partial`` marker only on success."""
    run = RunDirectory.create(command, output)
    try:
        yield run
    except BaseException:
        logger.error(f"{command} failed; leaving {run.path} marked partial")
        raise
    run.complete()
