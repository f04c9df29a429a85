"""
Management command to turn raw extracts (or an incomplete trajectory file)
into complete trajectory JSONL.

Usage:
    python manage.py preprocess --extracts=extracts/ --category-map=atc.csv
    python manage.py preprocess --data=runs/simulate-x/cohort.jsonl --knn-k=5
"""
import logging

from core.commands import TreatRecCommand
from core.exceptions import ConfigurationError
from data_pipeline.services.cohort_filter import REASONS
from data_pipeline.services.pipeline import EXCLUSIONS_FILENAME, preprocess, write_result

logger = logging.getLogger(__name__)

TRAJECTORIES_FILENAME = 'trajectories.jsonl'


class Command(TreatRecCommand):
    help = 'Bin, filter, re-encode and impute admissions into complete trajectory JSONL'
    command_name = 'preprocess'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--extracts',
            type=str,
            help='Directory with admissions/measurements/medications/diagnoses CSV extracts'
        )
        parser.add_argument(
            '--data',
            type=str,
            help='Trajectory JSONL to re-process instead of extracts'
        )
        parser.add_argument(
            '--category-map',
            type=str,
            help='code,category CSV mapping medication codes to categories'
        )
        parser.add_argument(
            '--knn-k',
            type=int,
            help='Neighbours used for imputation (default: 10)'
        )
        parser.add_argument(
            '--top-medications',
            type=int,
            help='Medication vocabulary size'
        )
        parser.add_argument(
            '--top-diseases',
            type=int,
            help='Disease vocabulary size'
        )

    def overrides(self, options):
        return {
            'paths.extracts': options.get('extracts'),
            'paths.data': options.get('data'),
            'paths.category_map': options.get('category_map'),
            'preprocess.knn_k': options.get('knn_k'),
            'preprocess.top_medications': options.get('top_medications'),
            'preprocess.top_diseases': options.get('top_diseases'),
        }

    def execute_run(self, config, run, options):
        paths = config.paths
        if bool(paths.extracts) == bool(paths.data):
            raise ConfigurationError('preprocess needs exactly one of --extracts or --data')
        source = paths.extracts or paths.data

        self.stdout.write(self.style.SUCCESS('\nPreprocessing:'))
        self.stdout.write(f'  Source: {source}')
        self.stdout.write(f'  kNN k: {config.preprocess.knn_k}')
        if paths.category_map:
            self.stdout.write(f'  Category map: {paths.category_map}')

        result = preprocess(source, config.preprocess, paths.category_map)
        write_result(result, run.file(TRAJECTORIES_FILENAME), run.file(EXCLUSIONS_FILENAME))

        counts = result.report.counts
        self.stdout.write('')
        self.write_table(
            [['kept', result.report.kept]] + [[reason, counts[reason]] for reason in REASONS],
            headers=['admissions', 'count'],
        )
        self.stdout.write(
            f'\nMedications: {result.manifest.n_medications}  Diseases: {result.manifest.n_diseases}'
        )
