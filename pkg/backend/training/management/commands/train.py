"""
Management command to train a treatment recommendation policy.

Usage:
    python manage.py train --data=runs/simulate-x/cohort.jsonl --epochs=20
    python manage.py train --config=run.json --epsilon=0.6 --output=runs/eps06
    python manage.py train --data=cohort.jsonl --resume=runs/train-x
"""
import logging

from core.commands import TreatRecCommand
from core.exceptions import ConfigurationError
from data_pipeline.trajectories import read_trajectories
from training.services.runner import train_dataset

logger = logging.getLogger(__name__)


class Command(TreatRecCommand):
    help = 'Train the imitation-regularized recurrent actor-critic on trajectory JSONL'
    command_name = 'train'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--data',
            type=str,
            help='Trajectory JSONL file (with its .meta.json manifest)'
        )
        parser.add_argument(
            '--resume',
            type=str,
            help='Checkpoint file or training run directory to continue from'
        )
        parser.add_argument(
            '--epsilon',
            type=float,
            help='Imitation weight: 0 = pure actor-critic, 1 = pure imitation'
        )
        parser.add_argument(
            '--epochs',
            type=int,
            help='Total number of epochs (including already completed ones when resuming)'
        )

    def overrides(self, options):
        return {
            'paths.data': options.get('data'),
            'paths.resume': options.get('resume'),
            'train.epsilon': options.get('epsilon'),
            'train.epochs': options.get('epochs'),
        }

    def execute_run(self, config, run, options):
        if not config.paths.data:
            raise ConfigurationError('train needs --data or paths.data')
        dataset = read_trajectories(config.paths.data, require_complete=True)

        self.stdout.write(self.style.SUCCESS('\nTraining Plan:'))
        self.stdout.write(f'  Admissions: {len(dataset)}')
        self.stdout.write(f'  Medications: {dataset.manifest.n_medications}')
        self.stdout.write(f'  Epsilon: {config.train.epsilon}')
        self.stdout.write(f'  Epochs: {config.train.epochs}')
        if config.paths.resume:
            self.stdout.write(f'  Resuming from: {config.paths.resume}')

        result = train_dataset(dataset, config.train, run, resume_from=config.paths.resume)
        self.stdout.write('')
        self.write_table(
            [[m.epoch, m.mean_td_error, m.mean_return, m.jaccard] for m in result.trace],
            headers=['epoch', 'mean_td_error', 'mean_return', 'jaccard'],
        )
