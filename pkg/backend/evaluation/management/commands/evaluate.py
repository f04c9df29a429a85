"""
Management command to evaluate a trained checkpoint.

Usage:
    python manage.py evaluate --checkpoint=runs/train-x --data=cohort.jsonl
    python manage.py evaluate --checkpoint=runs/train-x --data=cohort.jsonl --episodes=2000
    python manage.py evaluate --checkpoint=runs/train-x --data=cohort.jsonl --doctor-baseline
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path

from core.commands import TreatRecCommand
from core.exceptions import ConfigurationError
from data_pipeline.trajectories import read_trajectories
from evaluation.services.evaluator import evaluate_checkpoint
from evaluation.services.reports import write_reports
from training.services.runner import SPLITS_FILENAME

logger = logging.getLogger(__name__)


class Command(TreatRecCommand):
    help = 'Evaluate a checkpoint: Jaccard, estimated mortality, treatment difference and returns'
    command_name = 'evaluate'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--checkpoint',
            type=str,
            help='Checkpoint file or training run directory'
        )
        parser.add_argument(
            '--data',
            type=str,
            help='Trajectory JSONL file'
        )
        parser.add_argument(
            '--splits',
            type=str,
            help="splits.json selecting the evaluated admissions (default: the training run's, if present)"
        )
        parser.add_argument(
            '--split',
            type=str,
            choices=['train', 'validation', 'test'],
            help='Split to evaluate (default: test)'
        )
        parser.add_argument(
            '--threshold',
            type=float,
            help='Selection threshold for recommended medications'
        )
        parser.add_argument(
            '--bins',
            type=int,
            help='Equal-width Q bins for estimated mortality'
        )
        parser.add_argument(
            '--episodes',
            type=int,
            help='Simulated admissions for true survival (simulated cohorts only)'
        )
        parser.add_argument(
            '--doctor-baseline',
            action='store_true',
            help="Score the doctor's own prescriptions instead of the policy's"
        )

    def overrides(self, options):
        return {
            'paths.checkpoint': options.get('checkpoint'),
            'paths.data': options.get('data'),
            'paths.splits': options.get('splits'),
            'evaluation.split': options.get('split'),
            'evaluation.threshold': options.get('threshold'),
            'evaluation.bins': options.get('bins'),
            'evaluation.episodes': options.get('episodes'),
        }

    def execute_run(self, config, run, options):
        paths = config.paths
        if not paths.checkpoint or not paths.data:
            raise ConfigurationError('evaluate needs --checkpoint and --data')
        dataset = read_trajectories(paths.data, require_complete=True)

        splits_path = paths.splits
        if splits_path is None and Path(paths.checkpoint).is_dir():
            candidate = Path(paths.checkpoint) / SPLITS_FILENAME
            splits_path = candidate if candidate.exists() else None

        patient_model = config.cohort.to_patient_model() if dataset.manifest.source == 'cohort' else None
        gamma = config.evaluation.gamma if config.evaluation.gamma is not None else config.train.gamma

        pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else nullcontext()
        with pool as executor:
            report = evaluate_checkpoint(
                paths.checkpoint, dataset, config.evaluation, gamma,
                splits_path=splits_path, patient_model=patient_model, seed=config.seed,
                executor=executor, baseline=options.get('doctor_baseline', False),
            )
        write_reports(run, report)

        self.stdout.write('')
        self.write_table(sorted(report.summary().items()), headers=['metric', 'value'])
