"""
Management command to train and evaluate one policy per imitation weight.

Usage:
    python manage.py sweep_epsilon --data=cohort.jsonl
    python manage.py sweep_epsilon --data=cohort.jsonl --epsilons=0,0.5,1 --episodes=1000
    python manage.py sweep_epsilon --data=cohort.jsonl --epsilons=0,0.5,1 --seeds=0,1,2
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

from core.commands import TreatRecCommand
from core.exceptions import ConfigurationError
from data_pipeline.trajectories import read_trajectories
from evaluation.services.sweep import DEFAULT_EPSILONS, MEAN_LABEL, compare_endpoints, run_epsilon_sweep

logger = logging.getLogger(__name__)


def parse_epsilons(value: str):
    try:
        epsilons = [float(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise ConfigurationError(f'--epsilons must be comma-separated numbers, got {value!r}')
    if not epsilons or any(not 0.0 <= e <= 1.0 for e in epsilons):
        raise ConfigurationError(f'--epsilons must be non-empty values in [0, 1], got {value!r}')
    return epsilons


def parse_seeds(value: str):
    try:
        seeds = [int(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise ConfigurationError(f'--seeds must be comma-separated integers, got {value!r}')
    if not seeds or any(s < 0 for s in seeds) or len(set(seeds)) != len(seeds):
        raise ConfigurationError(f'--seeds must be distinct non-negative integers, got {value!r}')
    return seeds


class Command(TreatRecCommand):
    help = 'Train and evaluate the policy for several imitation weights epsilon'
    command_name = 'sweep_epsilon'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--data',
            type=str,
            help='Trajectory JSONL file'
        )
        parser.add_argument(
            '--epsilons',
            type=str,
            default=','.join(f'{e:g}' for e in DEFAULT_EPSILONS),
            help='Comma-separated epsilon values (default: 0,0.25,0.5,0.75,1)'
        )
        parser.add_argument(
            '--seeds',
            type=str,
            help='Comma-separated training seeds per epsilon (default: the training seed)'
        )
        parser.add_argument(
            '--epochs',
            type=int,
            help='Epochs per policy'
        )
        parser.add_argument(
            '--episodes',
            type=int,
            help='Simulated admissions for true survival (simulated cohorts only)'
        )

    def overrides(self, options):
        return {
            'paths.data': options.get('data'),
            'train.epochs': options.get('epochs'),
            'evaluation.episodes': options.get('episodes'),
        }

    def execute_run(self, config, run, options):
        if not config.paths.data:
            raise ConfigurationError('sweep_epsilon needs --data or paths.data')
        epsilons = parse_epsilons(options['epsilons'])
        seeds = parse_seeds(options['seeds']) if options.get('seeds') else None
        dataset = read_trajectories(config.paths.data, require_complete=True)
        patient_model = config.cohort.to_patient_model() if dataset.manifest.source == 'cohort' else None

        self.stdout.write(self.style.SUCCESS('\nEpsilon Sweep:'))
        self.stdout.write(f'  Admissions: {len(dataset)}')
        self.stdout.write(f'  Epsilons: {", ".join(f"{e:g}" for e in epsilons)}')
        if seeds:
            self.stdout.write(f'  Seeds: {", ".join(str(s) for s in seeds)}')

        pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else nullcontext()
        with pool as executor:
            rows = run_epsilon_sweep(
                dataset, config.train, config.evaluation, run, epsilons,
                patient_model=patient_model, seed=config.seed, seeds=seeds, executor=executor,
            )

        self.stdout.write('')
        self.write_table(
            [
                [r.epsilon, MEAN_LABEL if r.is_mean else r.seed, r.mean_jaccard, r.aggregated_jaccard,
                 r.estimated_mortality, r.mortality_trend, r.true_survival]
                for r in rows
            ],
            headers=['epsilon', 'seed', 'jaccard', 'aggregated_jaccard', 'estimated_mortality',
                     'mortality_trend', 'true_survival'],
        )

        comparison = compare_endpoints(rows)
        if comparison is not None:
            self.stdout.write(self.style.SUCCESS(f'\nepsilon={comparison.epsilon:g} against the endpoints:'))
            self.stdout.write(f'  Survival gain over pure imitation: {comparison.survival_gain_over_imitation:+.4f}')
            self.stdout.write(f'  Jaccard gain over pure critic: {comparison.jaccard_gain_over_critic:+.4f}')
            if comparison.endpoint_best_on_both:
                self.stdout.write(self.style.WARNING('  An endpoint is best on both survival and Jaccard'))
