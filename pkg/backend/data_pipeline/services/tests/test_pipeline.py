"""
Tests for the preprocessing pipeline on small CSV extracts.
"""
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from core.exceptions import DataFormatError, EmptyInputError
from data_pipeline.config.preprocess import PreprocessConfig
from data_pipeline.services.cohort_filter import MISSING_AGE, NO_MEASUREMENTS, UNDER_AGE
from data_pipeline.services.pipeline import (
    EXCLUSIONS_FILENAME,
    PREPROCESSED_SOURCE,
    fill_empty_units,
    preprocess,
    write_result,
)
from data_pipeline.trajectories import read_trajectories

ADMISSIONS = """admission_id,admit_time,discharge_time,age,gender,weight,height,survived
a1,2020-01-01 00:00:00,2020-01-03 00:00:00,60,1,70,175,1
a2,2020-01-01 00:00:00,2020-01-02 00:00:00,17,0,60,160,1
a3,2020-01-01 00:00:00,2020-01-02 00:00:00,70,1,90,180,0
a4,2020-02-01 00:00:00,2020-02-02 00:00:00,45,0,80,165,0
a5,2020-03-01 00:00:00,2020-03-02 00:00:00,,1,75,170,1
"""

MEASUREMENTS = """admission_id,time,variable,value
a1,2020-01-01 01:00:00,hr,100
a1,2020-01-01 05:00:00,hr,120
a1,2020-01-01 06:00:00,sbp,90
a1,2020-01-02 03:00:00,hr,80
a1,2020-01-02 04:00:00,sbp,100
a2,2020-01-01 02:00:00,hr,130
a4,2020-02-01 02:00:00,hr,95
a5,2020-03-01 02:00:00,hr,85
"""

MEDICATIONS = """admission_id,time,code
a1,2020-01-01 02:00:00,m1
a1,2020-01-02 02:00:00,m2
a1,2020-01-02 03:00:00,m1
a4,2020-02-01 03:00:00,m2
"""

DIAGNOSES = """admission_id,code
a1,d1
a1,d2
a4,d2
"""


class PipelineTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.extracts = self.dir / 'extracts'
        self.extracts.mkdir()
        for name, text in [('admissions', ADMISSIONS), ('measurements', MEASUREMENTS),
                           ('medications', MEDICATIONS), ('diagnoses', DIAGNOSES)]:
            (self.extracts / f'{name}.csv').write_text(text, encoding='utf-8')
        self.config = PreprocessConfig(knn_k=2)

    def tearDown(self):
        self.tmp.cleanup()


class TestPreprocessExtracts(PipelineTestCase):

    def test_cohort_filter_reasons(self):
        result = preprocess(self.extracts, self.config)
        self.assertEqual([r.id for r in result.records], ['a1', 'a4'])
        self.assertEqual(
            sorted(result.report.excluded),
            [('a2', UNDER_AGE), ('a3', NO_MEASUREMENTS), ('a5', MISSING_AGE)],
        )

    def test_units_and_rewards(self):
        a1, a4 = preprocess(self.extracts, self.config).records
        self.assertEqual(len(a1.units), 2)
        self.assertEqual(a1.units[0].obs, [110.0, 90.0])
        self.assertEqual([u.reward for u in a1.units], [0.0, 15.0])
        self.assertEqual([u.reward for u in a4.units], [-15.0])
        self.assertFalse(a4.survived)

    def test_missing_variable_imputed_from_neighbours(self):
        _, a4 = preprocess(self.extracts, self.config).records
        # the two other unit rows observe sbp 90 and 100
        self.assertEqual(a4.units[0].obs[0], 95.0)
        self.assertAlmostEqual(a4.units[0].obs[1], 95.0)

    def test_vocabularies(self):
        result = preprocess(self.extracts, self.config)
        manifest = result.manifest
        self.assertEqual(manifest.medication_vocab, ['m1', 'm2'])
        self.assertEqual(manifest.disease_vocab, ['d2', 'd1'])
        self.assertEqual(manifest.series_fields, ['hr', 'sbp'])
        self.assertEqual(manifest.source, PREPROCESSED_SOURCE)
        a1, a4 = result.records
        self.assertEqual([u.meds for u in a1.units], [[0], [0, 1]])
        self.assertEqual(a4.diseases, [0])

    def test_category_map_merges_medications(self):
        category_map = self.dir / 'map.csv'
        category_map.write_text('code,category\nm1,vasopressor\nm2,vasopressor\n', encoding='utf-8')
        result = preprocess(self.extracts, self.config, category_map)
        self.assertEqual(result.manifest.medication_vocab, ['vasopressor'])
        self.assertEqual([u.meds for u in result.records[0].units], [[0], [0]])

    def test_medication_vocabulary_truncated(self):
        config = PreprocessConfig(knn_k=2, top_medications=1)
        result = preprocess(self.extracts, config)
        self.assertEqual(result.manifest.medication_vocab, ['m1'])
        self.assertEqual(result.records[1].units[0].meds, [])

    def test_rerun_on_output_changes_nothing(self):
        first = preprocess(self.extracts, self.config)
        output = self.dir / 'trajectories.jsonl'
        write_result(first, output)
        second = preprocess(output, self.config)
        self.assertEqual(
            [r.model_dump() for r in second.records],
            [r.model_dump() for r in first.records],
        )
        self.assertEqual(second.manifest, first.manifest)

    def test_output_is_complete(self):
        result = preprocess(self.extracts, self.config)
        output = self.dir / 'out' / 'trajectories.jsonl'
        exclusions = self.dir / EXCLUSIONS_FILENAME
        write_result(result, output, exclusions)
        dataset = read_trajectories(output, require_complete=True)
        self.assertEqual(len(dataset), 2)
        frame = pd.read_csv(exclusions)
        self.assertEqual(list(frame.columns), ['admission_id', 'reason'])
        self.assertEqual(len(frame), 3)

    def test_everyone_excluded(self):
        config = PreprocessConfig(knn_k=2, min_age=99)
        with self.assertRaises(EmptyInputError):
            preprocess(self.extracts, config)

    def test_bad_timestamp_reports_line(self):
        (self.extracts / 'medications.csv').write_text(
            'admission_id,time,code\na1,2020-01-01 02:00:00,m1\na1,not-a-time,m2\n', encoding='utf-8',
        )
        with self.assertRaises(DataFormatError) as context:
            preprocess(self.extracts, self.config)
        self.assertEqual(context.exception.line_number, 3)


class TestFillEmptyUnits(unittest.TestCase):

    def test_empty_units_carry_neighbours(self):
        observations = np.array([
            [1.0, np.nan],
            [np.nan, np.nan],
            [np.nan, 4.0],
        ])
        filled = fill_empty_units(observations)
        np.testing.assert_array_equal(filled[1], [1.0, 4.0])
        self.assertTrue(np.isnan(filled[0, 1]))
        self.assertTrue(np.isnan(filled[2, 0]))

    def test_leading_gap_takes_later_unit(self):
        observations = np.array([[np.nan, np.nan], [2.0, 3.0]])
        np.testing.assert_array_equal(fill_empty_units(observations), [[2.0, 3.0], [2.0, 3.0]])


if __name__ == '__main__':
    unittest.main()
