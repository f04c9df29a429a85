"""
Management command to simulate a synthetic cohort treated by the noisy doctor.

Usage:
    python manage.py simulate --n=2000 --seed=7
    python manage.py simulate --config=run.json --p-noise=0.5 --output=runs/cohort-noisy
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

from cohort.services.simulator import sample_cohort, summarize
from core.commands import TreatRecCommand
from data_pipeline.trajectories import write_trajectories

logger = logging.getLogger(__name__)

COHORT_FILENAME = 'cohort.jsonl'


class Command(TreatRecCommand):
    help = 'Simulate a synthetic ICU cohort and write it as trajectory JSONL'
    command_name = 'simulate'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--n',
            type=int,
            help='Number of admissions (default: cohort.n_admissions)'
        )
        parser.add_argument(
            '--p-noise',
            type=float,
            help='Probability that each doctor prescription bit is replaced by a coin flip'
        )

    def overrides(self, options):
        return {
            'cohort.n_admissions': options.get('n'),
            'cohort.p_noise': options.get('p_noise'),
        }

    def execute_run(self, config, run, options):
        cohort_config = config.cohort
        model = cohort_config.to_patient_model()
        doctor = cohort_config.to_doctor()

        self.stdout.write(self.style.SUCCESS('\nCohort Simulation:'))
        self.stdout.write(f'  Admissions: {cohort_config.n_admissions}')
        self.stdout.write(f'  Doctor noise: {cohort_config.p_noise}')
        self.stdout.write(f'  Seed: {config.seed}')

        pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else nullcontext()
        with pool as executor:
            cohort = sample_cohort(model, doctor, cohort_config.n_admissions, config.seed, executor)

        write_trajectories(run.file(COHORT_FILENAME), cohort, model.manifest())
        summary = summarize(cohort)
        self.stdout.write('')
        self.write_table(
            [[summary.admissions, summary.survival_rate, summary.mean_length]],
            headers=['admissions', 'survival_rate', 'mean_length'],
        )
