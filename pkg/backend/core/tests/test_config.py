"""
Tests for config loading and flag precedence.
"""
import json

import pytest

from core.config import load_config, merge_overrides
from core.exceptions import ConfigurationError
from evaluation.config import EvaluationConfig
from training.config import TrainConfig
from treatrec.run_config import RunConfig


def write_config(tmp_path, payload, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding='utf-8')
    return path


class TestLoadConfig:

    def test_defaults(self):
        config = load_config(RunConfig)
        assert config.seed == 0
        assert config.train.epsilon == 0.5
        assert config.evaluation.threshold == 0.5
        assert config.evaluation.bins == 50
        assert config.cohort.p_noise == 0.3

    def test_file_overrides_defaults(self, tmp_path):
        path = write_config(tmp_path, {'seed': 9, 'train': {'epsilon': 0.25}})
        config = load_config(RunConfig, path)
        assert config.seed == 9
        assert config.train.epsilon == 0.25
        assert config.train.gamma == 0.99

    def test_flags_override_file(self, tmp_path):
        path = write_config(tmp_path, {'seed': 9, 'train': {'epsilon': 0.25}})
        config = load_config(RunConfig, path, {'train.epsilon': 0.75, 'seed': None})
        assert config.train.epsilon == 0.75
        assert config.seed == 9

    def test_training_inherits_global_seed_and_workers(self, tmp_path):
        config = load_config(RunConfig, write_config(tmp_path, {'seed': 4, 'workers': 3}))
        assert config.train.seed == 4
        assert config.train.workers == 3
        own = load_config(RunConfig, write_config(tmp_path, {'seed': 4, 'train': {'seed': 8, 'workers': 1}}))
        assert own.train.seed == 8
        assert own.train.workers == 1

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(RunConfig, write_config(tmp_path, {'train': {'epsilonn': 0.5}}))
        assert 'train.epsilonn' in str(excinfo.value)

    def test_out_of_range_value(self):
        with pytest.raises(ConfigurationError):
            load_config(RunConfig, overrides={'train.epsilon': 1.5})

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{\n  "seed": 1,\n  "train": \n}\n', encoding='utf-8')
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(RunConfig, path)
        assert 'broken.json:4' in str(excinfo.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(RunConfig, tmp_path / 'absent.json')

    def test_top_level_must_be_object(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(RunConfig, write_config(tmp_path, [1, 2]))

    def test_configuration_error_exit_code(self):
        assert ConfigurationError.exit_code == 2


def test_merge_overrides_creates_sections_and_skips_unset():
    merged = merge_overrides({'seed': 1}, {'paths.data': 'x.jsonl', 'train.epochs': None})
    assert merged == {'seed': 1, 'paths': {'data': 'x.jsonl'}}


def test_selection_threshold_default_comes_from_settings(settings):
    settings.TREATREC_DEFAULTS = {**settings.TREATREC_DEFAULTS, 'selection_threshold': 0.3}
    assert TrainConfig().threshold == 0.3
    assert EvaluationConfig().threshold == 0.3
    assert load_config(RunConfig).train.threshold == 0.3
