"""
Shared base for the project's management commands.

Every command accepts ``--config``, ``--output``, ``--seed`` and
``--workers``, resolves a ``RunConfig`` (flags > file > defaults), writes
its outputs into a run directory that stays marked ``.partial`` until the
command succeeds, and exits with the domain error's exit code on failure.
"""
import logging
from typing import Any, Dict, Sequence

from django.core.management.base import BaseCommand, CommandError
from tabulate import tabulate

from core.config import load_config
from core.exceptions import TreatRecError
from core.run_directory import RunDirectory, run_directory
from treatrec.run_config import RunConfig

logger = logging.getLogger(__name__)


class TreatRecCommand(BaseCommand):
    command_name = ''

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=str,
            help='JSON config file; flags override its values'
        )
        parser.add_argument(
            '--output',
            type=str,
            help='Run directory (default: timestamped directory under TREATREC_OUTPUT_ROOT)'
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Global random seed'
        )
        parser.add_argument(
            '--workers',
            type=int,
            help='Worker threads (default: TREATREC_WORKERS, 1 for exact serial order)'
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def overrides(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Dotted config paths set by this command's own flags."""
        return {}

    def execute_run(self, config, run: RunDirectory, options: Dict[str, Any]):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = load_config(RunConfig, options.get('config'), {
                'seed': options.get('seed'),
                'workers': options.get('workers'),
                'paths.output': options.get('output'),
                **self.overrides(options),
            })
            with run_directory(self.command_name, config.paths.output) as run:
                run.write_config(config)
                self.execute_run(config, run, options)
        except TreatRecError as e:
            logger.error(f"{self.command_name} failed: {e}")
            raise CommandError(str(e), returncode=e.exit_code)

        self.stdout.write(self.style.SUCCESS(f'\nOutputs written to {run.path}'))

    def write_table(self, rows: Sequence[Sequence[Any]], headers: Sequence[str]):
        self.stdout.write(tabulate(rows, headers=headers, floatfmt='.4f'))
