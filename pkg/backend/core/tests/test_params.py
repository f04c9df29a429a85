"""
Tests for parameter-set helpers and run directories.
"""
import json

import numpy as np
import pytest

from core.exceptions import DimensionError, NumericalError
from core.params import (
    apply_step,
    clip_by_global_norm,
    flatten,
    global_norm,
    sum_in_order,
    unflatten,
)
from core.run_directory import PARTIAL_MARKER, RunDirectory, run_directory


class TestParamSets:

    def setup_method(self):
        self.params = {'a.W': np.ones((2, 3)), 'a.b': np.zeros(2)}

    def test_flatten_unflatten(self):
        vector = flatten(self.params)
        assert vector.shape == (8,)
        restored = unflatten(vector, self.params)
        assert list(restored) == ['a.W', 'a.b']
        np.testing.assert_array_equal(restored['a.W'], self.params['a.W'])

    def test_unflatten_rejects_wrong_length(self):
        with pytest.raises(DimensionError):
            unflatten(np.zeros(7), self.params)

    def test_apply_step_is_not_in_place(self):
        grads = {'a.W': np.ones((2, 3)), 'a.b': np.ones(2)}
        updated = apply_step(self.params, grads, -0.5)
        np.testing.assert_array_equal(updated['a.W'], np.full((2, 3), 0.5))
        np.testing.assert_array_equal(self.params['a.W'], np.ones((2, 3)))

    def test_apply_step_rejects_incongruent_gradients(self):
        with pytest.raises(DimensionError):
            apply_step(self.params, {'a.W': np.ones((3, 2)), 'a.b': np.ones(2)}, 1.0)

    def test_apply_step_detects_non_finite(self):
        grads = {'a.W': np.full((2, 3), np.inf), 'a.b': np.zeros(2)}
        with pytest.raises(NumericalError):
            apply_step(self.params, grads, 1.0)

    def test_clip_by_global_norm(self):
        grads = {'x': np.array([3.0, 4.0])}
        clipped = clip_by_global_norm(grads, 1.0)
        assert global_norm(clipped) == pytest.approx(1.0)
        assert clip_by_global_norm(grads, None) is grads
        assert clip_by_global_norm(grads, 10.0) is grads

    def test_sum_in_order(self):
        total = sum_in_order([{'x': np.array([1.0])}, {'x': np.array([2.0])}], {'x': np.zeros(1)})
        np.testing.assert_array_equal(total['x'], [3.0])


class TestRunDirectory:

    def test_marker_removed_on_success(self, tmp_path):
        with run_directory('simulate', tmp_path / 'run') as run:
            assert run.is_partial
            run.write_json('summary.json', {'b': 1, 'a': 2})
        assert not (tmp_path / 'run' / PARTIAL_MARKER).exists()
        assert json.loads((tmp_path / 'run' / 'summary.json').read_text()) == {'a': 2, 'b': 1}

    def test_marker_kept_on_failure(self, tmp_path):
        with pytest.raises(RuntimeError):
            with run_directory('train', tmp_path / 'run'):
                raise RuntimeError('boom')
        assert (tmp_path / 'run' / PARTIAL_MARKER).exists()

    def test_default_location_under_output_root(self, tmp_path, settings):
        settings.OUTPUT_ROOT = tmp_path
        run = RunDirectory.create('evaluate')
        assert run.path.parent == tmp_path
        assert run.path.name.startswith('evaluate-')
