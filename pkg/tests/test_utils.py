import numpy as np
import pytest

from tasksampler.config import Settings
from tasksampler.utils import categorical_from_log, mean_ci95, spawn_generators


def test_categorical_skips_minus_infinity(rng):
    log_weights = np.array([-np.inf, 0.0, -np.inf, np.log(3.0)])
    draws = np.bincount([categorical_from_log(log_weights, rng) for _ in range(20_000)], minlength=4)
    assert draws[0] == draws[2] == 0
    assert draws[3] / draws.sum() == pytest.approx(0.75, abs=0.02)


def test_categorical_survives_huge_log_weights(rng):
    assert categorical_from_log(np.array([1000.0, 1000.0 - 50.0]), rng) == 0


def test_categorical_needs_a_positive_weight(rng):
    with pytest.raises(ValueError):
        categorical_from_log(np.full(3, -np.inf), rng)


def test_spawned_streams_replay():
    first = [g.random() for g in spawn_generators(9, 3)]
    second = [g.random() for g in spawn_generators(9, 3)]
    assert first == second
    assert len(set(first)) == 3


def test_mean_ci95():
    mean, ci95 = mean_ci95([0.0, 1.0])
    assert mean == 0.5
    assert ci95 == pytest.approx(1.96 * np.sqrt(0.5) / np.sqrt(2))
    assert mean_ci95([0.3]) == (0.3, 0.0)


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("TASKSAMPLER_ENUMERATION_CAP", "42")
    monkeypatch.setenv("TASKSAMPLER_LOG_LEVEL", "DEBUG")
    fresh = Settings()
    assert fresh.enumeration_cap == 42
    assert fresh.log_level == "DEBUG"
