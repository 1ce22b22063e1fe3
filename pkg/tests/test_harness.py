from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from tasksampler.config import load_run_config
from tasksampler.errors import EnumerationCapError, EvaluationLeakError, NonFiniteError
from tasksampler.fewshot import CategorySet, meta_split
from tasksampler.harness import (
    Trainer,
    bench_grid,
    bench_overhead,
    compare_strategies,
    potential_recovery,
    run_training,
    sweep_hyperparameters,
    verify_greedy_law,
)
from tasksampler.harness.bench import _interleaved_timings
from tasksampler.harness.training import StepResult
from tasksampler.potentials import PotentialMatrix
from tasksampler.schemas import SamplingStrategy
from tasksampler.synthdata import confusability_ground_truth, generate


def with_changes(config, **changes):
    return config.model_copy(update=changes)


# run_training
def test_run_directory_contents(tiny_config):
    run = run_training(tiny_config)
    names = {path.name for path in run.run_dir.iterdir()}
    assert {"config.echo", "metrics.csv", "timing.csv", "class_counts.csv", "weights.csv", "prototypes.csv"} <= names
    assert sorted(n for n in names if n.startswith("potentials_")) == [
        "potentials_20.csv",
        "potentials_40.csv",
        "potentials_60.csv",
        "potentials_80.csv",
    ]
    metrics = pd.read_csv(run.run_dir / "metrics.csv")
    assert list(metrics.columns) == ["iteration", "train_loss", "eval_accuracy_mean", "eval_accuracy_ci95"]
    assert metrics["iteration"].tolist() == [40, 80]
    assert metrics["eval_accuracy_mean"].between(0, 1).all()
    assert np.isfinite(metrics["train_loss"]).all()


def test_snapshot_cadence_at_default_interval(tiny_config):
    config = with_changes(tiny_config, iterations=600, snapshot_every=40, eval_every=600, eval_episodes=10)
    run = run_training(config)
    assert len(list(run.run_dir.glob("potentials_*.csv"))) == 15


def test_identical_configs_write_identical_metrics(tiny_config, tmp_path):
    first = run_training(with_changes(tiny_config, out=tmp_path / "a"))
    second = run_training(with_changes(tiny_config, out=tmp_path / "b"))
    for name in ("metrics.csv", "potentials_80.csv", "class_counts.csv", "weights.csv"):
        assert (first.run_dir / name).read_bytes() == (second.run_dir / name).read_bytes()


def test_random_strategy_keeps_potentials_at_one(tiny_config):
    run = run_training(with_changes(tiny_config, strategy=SamplingStrategy.RANDOM))
    assert np.all(run.trainer.sampler.potentials.log_potentials == 0.0)
    snapshot = pd.read_csv(run.run_dir / "potentials_80.csv").to_numpy()
    assert np.all(snapshot[~np.eye(len(snapshot), dtype=bool)] == 1.0)
    assert run.recovery is None


def test_adaptive_run_records_recovery(tiny_config):
    run = run_training(tiny_config)
    assert run.recovery is not None
    assert -1.0 <= run.recovery.spearman_distance <= 1.0
    recovery = pd.read_csv(run.run_dir / "recovery.csv")
    assert list(recovery.columns) == ["spearman_distance", "spearman_same_supercluster"]


def test_training_only_sees_meta_train_classes(tiny_config):
    run = run_training(tiny_config)
    counts = pd.read_csv(run.run_dir / "class_counts.csv")
    assert counts["class_id"].tolist() == list(range(9))
    assert counts["episodes"].sum() == tiny_config.iterations * tiny_config.k_way
    prototypes = pd.read_csv(run.run_dir / "prototypes.csv")
    assert prototypes.groupby("split").size().to_dict() == {"test": 3, "train": 9}


def test_class_sampler_run(tiny_config):
    run = run_training(with_changes(tiny_config, strategy=SamplingStrategy.C_HARD))
    assert not np.allclose(run.trainer.sampler.weights.weights, 1.0)


def test_config_echo_reloads(tiny_config):
    run = run_training(tiny_config)
    assert load_run_config(run.run_dir / "config.echo") == tiny_config


def test_divergent_learning_rate_aborts(tiny_config):
    with pytest.raises(NonFiniteError):
        run_training(with_changes(tiny_config, learning_rate=float("inf")))


def test_trainer_refuses_held_out_classes(tiny_config):
    train, _ = meta_split(generate(tiny_config.cluster_spec()), tiny_config.train_fraction)
    trainer = Trainer(tiny_config, train, held_out_ids=train.class_ids)
    with pytest.raises(EvaluationLeakError):
        trainer.step()


def test_evaluation_tasks_repeat_across_evaluations(tiny_config):
    train, test = meta_split(generate(tiny_config.cluster_spec()), tiny_config.train_fraction)
    trainer = Trainer(tiny_config, train, held_out_ids=test.class_ids)
    assert trainer.evaluate(test) == trainer.evaluate(test)


def test_potential_recovery_of_planted_structure(tiny_config):
    spec = tiny_config.cluster_spec()
    dataset = generate(spec)
    truth = confusability_ground_truth(dataset, spec)
    table = np.zeros((dataset.num_classes, dataset.num_classes))
    table[truth["i"].to_numpy(), truth["j"].to_numpy()] = -truth["center_distance"].to_numpy()
    recovery = potential_recovery(PotentialMatrix(dataset.num_classes, table + table.T), truth)
    assert recovery.spearman_distance == pytest.approx(1.0)
    assert recovery.spearman_same_supercluster > 0.3


# verify_greedy_law
def test_greedy_law_report(rng):
    report = verify_greedy_law(5, 3, 2, rng, draws=5000)
    frame = report.to_frame()
    assert len(frame) == 2 * 2 + 2 + 1
    assert (frame.loc[frame["k"] == 2, "tv_distance"] < 1e-12).all()
    assert (frame.loc[frame["matrix"] == "constant", "tv_distance"] < 1e-12).all()
    counterexample = frame[frame["matrix"] == "counterexample"].iloc[0]
    assert counterexample["tv_distance"] > 1e-3
    assert counterexample["p_gcp_first"] == pytest.approx(float(Fraction(121, 420)), abs=1e-9)
    assert counterexample["p_cp_first"] == pytest.approx(float(Fraction(6, 21)), abs=1e-9)


def test_greedy_law_report_size_limits(rng):
    with pytest.raises(EnumerationCapError):
        verify_greedy_law(9, 3, 1, rng)


# bench / compare / sweep
def test_bench_table(tiny_config):
    grid = bench_grid([2, 3], [1], [4])
    table = bench_overhead(tiny_config, grid, iterations=6, warmup=1, rounds=3)
    assert table[["k_way", "m_shot", "embed_dim"]].to_numpy().tolist() == [[2, 1, 4], [3, 1, 4]]
    assert (table["factor"] > 0).all()
    assert (table["gcp_sampling_ms"] <= table["gcp_ms"]).all()


class RecordingTrainer:
    def __init__(self, name, log, total_ms):
        self.name = name
        self.log = log
        self.total_ms = total_ms

    def step(self):
        self.log.append(self.name)
        return StepResult(categories=CategorySet((0, 1)), loss=0.0, sampling_ms=1.0, total_ms=self.total_ms)


def test_bench_alternates_strategies_between_rounds():
    log = []
    trainers = {
        SamplingStrategy.RANDOM: RecordingTrainer("random", log, 2.0),
        SamplingStrategy.GCP_HARD: RecordingTrainer("gcp", log, 3.0),
    }
    timings = _interleaved_timings(trainers, iterations=4, warmup=1, rounds=2)
    assert log == ["random", "gcp"] + ["random"] * 2 + ["gcp"] * 4 + ["random"] * 2
    assert timings[SamplingStrategy.RANDOM] == (2.0, 1.0)
    assert timings[SamplingStrategy.GCP_HARD] == (3.0, 1.0)


def test_compare_strategies_pairs_seeds(tiny_config, tmp_path):
    config = with_changes(tiny_config, iterations=20, eval_every=20, snapshot_every=20, eval_episodes=10)
    summary = compare_strategies(config, ["random", "gcp-hard"], [0, 1], tmp_path / "compare", workers=1)
    assert summary["strategy"].tolist() == ["random", "gcp-hard"]
    assert summary["seeds"].tolist() == [2, 2]
    per_seed = pd.read_csv(tmp_path / "compare" / "per_seed.csv")
    assert len(per_seed) == 4
    assert (tmp_path / "compare" / "summary.csv").is_file()
    assert (tmp_path / "compare" / "gcp-hard" / "seed1" / "metrics.csv").is_file()


def test_compare_needs_two_seeds(tiny_config, tmp_path):
    with pytest.raises(ValueError):
        compare_strategies(tiny_config, ["random"], [0], tmp_path)


def test_sweep_table(tiny_config, tmp_path):
    config = with_changes(tiny_config, iterations=20, eval_every=20, snapshot_every=20, eval_episodes=10)
    summary = sweep_hyperparameters(config, [0.5], [1.0], [0], tmp_path / "sweep", workers=1)
    assert summary[["varied", "alpha", "tau"]].to_numpy().tolist() == [["alpha", 0.5, 0.5], ["tau", 1.0, 1.0]]
    assert (tmp_path / "sweep" / "sweep.csv").is_file()


def test_compare_without_hard_structure_finds_no_difference(tiny_config, tmp_path):
    config = with_changes(
        tiny_config, num_superclusters=tiny_config.num_classes, iterations=40, eval_every=40, eval_episodes=20
    )
    summary = compare_strategies(config, ["random", "gcp-hard"], [0, 1, 2, 3, 4], tmp_path, workers=1)
    by_strategy = summary.set_index("strategy")
    gap = by_strategy.loc["gcp-hard", "accuracy_mean"] - by_strategy.loc["random", "accuracy_mean"]
    assert abs(gap) < 0.05
    p_value = by_strategy.loc["gcp-hard", "paired_p_value"]
    assert p_value is None or np.isnan(p_value) or p_value > 0.01
