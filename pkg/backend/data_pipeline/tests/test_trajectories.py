"""
Tests for the trajectory JSONL reader and writer.
"""
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from core.exceptions import DataError, DataFormatError, DimensionError, EmptyInputError
from data_pipeline.schemas import DatasetManifest
from data_pipeline.trajectories import (
    Trajectory,
    manifest_path,
    read_trajectories,
    write_manifest,
    write_trajectories,
)

MANIFEST = DatasetManifest(
    n_medications=3,
    n_diseases=2,
    static_fields=['age', 'weight'],
    series_fields=['hr', 'sbp'],
    medication_vocab=['m1', 'm2', 'm3'],
)


def make_trajectory(admission_id='a1', length=3, missing=False):
    observations = np.arange(length * 2, dtype=float).reshape(length, 2) + 0.1
    if missing:
        observations[1, 0] = np.nan
    actions = np.zeros((length, 3))
    actions[:, 1] = 1.0
    rewards = np.zeros(length)
    rewards[-1] = 15.0
    return Trajectory(
        admission_id=admission_id,
        static=[63.0, 1 / 3],
        diseases=[0.0, 1.0],
        observations=observations,
        actions=actions,
        rewards=rewards,
        survived=True,
    )


class TrajectoryFileTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'cohort.jsonl'

    def tearDown(self):
        self.tmp.cleanup()

    def write_lines(self, *lines):
        write_manifest(self.path, MANIFEST)
        self.path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')


class TestWriteRead(TrajectoryFileTestCase):

    def test_values_survive_a_round_trip(self):
        original = [make_trajectory('a1'), make_trajectory('a2', length=1, missing=False)]
        self.assertEqual(write_trajectories(self.path, original, MANIFEST), 2)
        dataset = read_trajectories(self.path)
        self.assertEqual([t.admission_id for t in dataset.trajectories], ['a1', 'a2'])
        np.testing.assert_array_equal(dataset.trajectories[0].static, original[0].static)
        np.testing.assert_array_equal(dataset.trajectories[0].observations, original[0].observations)
        np.testing.assert_array_equal(dataset.trajectories[0].actions, original[0].actions)
        self.assertEqual(dataset.manifest, MANIFEST)

    def test_missing_values_written_as_null(self):
        write_trajectories(self.path, [make_trajectory(missing=True)], MANIFEST)
        line = json.loads(self.path.read_text(encoding='utf-8').splitlines()[0])
        self.assertIsNone(line['units'][1]['obs'][0])
        dataset = read_trajectories(self.path)
        self.assertTrue(np.isnan(dataset.trajectories[0].observations[1, 0]))

    def test_require_complete_rejects_missing_values(self):
        write_trajectories(self.path, [make_trajectory('a1'), make_trajectory('a2', missing=True)], MANIFEST)
        with self.assertRaises(DataFormatError) as context:
            read_trajectories(self.path, require_complete=True)
        self.assertEqual(context.exception.line_number, 2)

    def test_manifest_sits_next_to_the_data(self):
        self.assertEqual(manifest_path(self.path).name, 'cohort.meta.json')


class TestMalformedInput(TrajectoryFileTestCase):

    VALID = ('{"id":"a1","static":{"age":60,"weight":70},"diseases":[1],'
             '"units":[{"t":0,"obs":[1,2],"meds":[0],"reward":15.0}],"survived":true}')

    def test_invalid_json_reports_line(self):
        self.write_lines(self.VALID, '{"id": ')
        with self.assertRaises(DataFormatError) as context:
            read_trajectories(self.path)
        self.assertEqual(context.exception.line_number, 2)

    def test_non_contiguous_units(self):
        self.write_lines(self.VALID.replace('"t":0', '"t":1'))
        with self.assertRaises(DataFormatError) as context:
            read_trajectories(self.path)
        self.assertEqual(context.exception.line_number, 1)

    def test_medication_id_out_of_range(self):
        self.write_lines(self.VALID, self.VALID.replace('"meds":[0]', '"meds":[3]'))
        with self.assertRaises(DataFormatError) as context:
            read_trajectories(self.path)
        self.assertEqual(context.exception.line_number, 2)

    def test_wrong_observation_width(self):
        self.write_lines(self.VALID.replace('"obs":[1,2]', '"obs":[1]'))
        with self.assertRaises(DataFormatError):
            read_trajectories(self.path)

    def test_missing_manifest(self):
        self.path.write_text(self.VALID + '\n', encoding='utf-8')
        with self.assertRaises(DataError):
            read_trajectories(self.path)

    def test_empty_file(self):
        self.write_lines()
        with self.assertRaises(EmptyInputError):
            read_trajectories(self.path)


class TestTrajectory(unittest.TestCase):

    def test_lengths_must_agree(self):
        with self.assertRaises(DimensionError):
            Trajectory('a1', [60.0], [], np.zeros((3, 2)), np.zeros((2, 1)), np.zeros(3), True)

    def test_no_time_steps(self):
        with self.assertRaises(EmptyInputError):
            Trajectory('a1', [60.0], [], np.zeros((0, 2)), np.zeros((0, 1)), np.zeros(0), True)

    def test_prefix(self):
        prefix = make_trajectory(length=3).prefix(2)
        self.assertEqual(prefix.length, 2)
        self.assertEqual(prefix.actions.shape, (2, 3))
        with self.assertRaises(ValueError):
            make_trajectory(length=3).prefix(4)


if __name__ == '__main__':
    unittest.main()
