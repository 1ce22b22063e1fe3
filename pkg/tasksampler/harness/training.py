"""The adaptive episodic training loop and its run-directory exports."""
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from tasksampler.config import settings
from tasksampler.errors import EvaluationLeakError
from tasksampler.fewshot import CategorySet, ClassIndexedDataset, build_episode, meta_split
from tasksampler.harness.evaluation import EvaluationResult, RecoveryResult, evaluate, potential_recovery
from tasksampler.learner import LinearEmbedding, class_prototypes, save_weights_csv, train_step
from tasksampler.potentials import write_snapshot_csv
from tasksampler.samplers.tasks import GreedyPairTaskSampler, TaskSampler, make_task_sampler
from tasksampler.schemas import MetricsRow, RunConfig
from tasksampler.synthdata import confusability_ground_truth, generate
from tasksampler.utils import spawn_seeds

logger = logging.getLogger(__name__)

# child seed streams: sampler, episode, initialisation, evaluation
SAMPLER_STREAM, EPISODE_STREAM, INIT_STREAM, EVAL_STREAM = range(4)
WARMUP_FRACTION = 0.25


@dataclass(frozen=True)
class StepResult:
    categories: CategorySet
    loss: float
    sampling_ms: float
    total_ms: float


class Trainer:
    """One learner, one task sampler, one training dataset.

    Sampling time covers drawing the category set and adapting the sampler
    to the episode's predictions; total time covers the whole iteration.
    """

    def __init__(
        self,
        config: RunConfig,
        train_data: ClassIndexedDataset,
        held_out_ids: Iterable[int] = (),
    ):
        self.config = config
        self.train_data = train_data
        self.held_out_ids = frozenset(int(c) for c in held_out_ids)
        seeds = spawn_seeds(config.seed, 4)
        self.sampler_rng = np.random.default_rng(seeds[SAMPLER_STREAM])
        self.episode_rng = np.random.default_rng(seeds[EPISODE_STREAM])
        self.eval_seed = seeds[EVAL_STREAM]
        self.sampler: TaskSampler = make_task_sampler(config, train_data.num_classes)
        self.embedding = LinearEmbedding.initialize(
            train_data.dim,
            config.embed_dim,
            config.learning_rate,
            np.random.default_rng(seeds[INIT_STREAM]),
            scale=config.init_scale,
        )
        self.class_counts = np.zeros(train_data.num_classes, dtype=np.int64)
        self.iteration = 0

    def _check_isolation(self, categories: CategorySet) -> None:
        global_ids = self.train_data.class_ids[list(categories.classes)]
        leaked = self.held_out_ids.intersection(global_ids.tolist())
        if leaked:
            raise EvaluationLeakError(f"meta-test classes {sorted(leaked)} drawn at iteration {self.iteration}")

    def step(self) -> StepResult:
        self.iteration += 1
        config = self.config
        start = time.perf_counter()
        categories = self.sampler.sample(self.sampler_rng)
        sampled = time.perf_counter()
        self._check_isolation(categories)
        episode = build_episode(self.train_data, categories, config.m_shot, config.n_query, self.episode_rng)
        self.embedding, predictions, loss = train_step(self.embedding, episode)
        trained = time.perf_counter()
        self.sampler.observe(episode, predictions)
        done = time.perf_counter()

        self.class_counts[list(categories.classes)] += 1
        logger.debug("iteration %d: classes %s loss %.4f", self.iteration, categories.classes, loss)
        return StepResult(
            categories=categories,
            loss=loss,
            sampling_ms=((sampled - start) + (done - trained)) * 1000.0,
            total_ms=(done - start) * 1000.0,
        )

    def evaluate(self, test_data: ClassIndexedDataset) -> EvaluationResult:
        config = self.config
        return evaluate(
            self.embedding,
            test_data,
            config.k_way,
            config.m_shot,
            config.n_query,
            config.eval_episodes,
            np.random.default_rng(self.eval_seed),
        )


@dataclass
class TrainingRun:
    config: RunConfig
    run_dir: Path
    trainer: Trainer
    test_data: ClassIndexedDataset
    metrics: List[MetricsRow] = field(default_factory=list)
    recovery: Optional[RecoveryResult] = None

    @property
    def final_metrics(self) -> MetricsRow:
        return self.metrics[-1]


def default_run_dir(config: RunConfig) -> Path:
    return Path(config.out) if config.out else settings.output_root / f"train-{config.strategy.value}-seed{config.seed}"


def run_training(config: RunConfig) -> TrainingRun:
    """Meta-train on the synthetic dataset and write the run directory.

    Meta-test evaluation always draws tasks uniformly over held-out classes,
    from the same evaluation stream at every evaluation point.
    """
    run_dir = default_run_dir(config)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.echo").write_text(config.to_echo())

    spec = config.cluster_spec()
    train_data, test_data = meta_split(generate(spec), config.train_fraction, min_classes=config.k_way)
    trainer = Trainer(config, train_data, held_out_ids=test_data.class_ids)
    run = TrainingRun(config=config, run_dir=run_dir, trainer=trainer, test_data=test_data)
    logger.info(
        "training %s for %d iterations (%d-way %d-shot, %d train / %d test classes) -> %s",
        config.strategy.value,
        config.iterations,
        config.k_way,
        config.m_shot,
        train_data.num_classes,
        test_data.num_classes,
        run_dir,
    )

    losses: List[float] = []
    timing = []
    started = time.perf_counter()
    for t in range(1, config.iterations + 1):
        step = trainer.step()
        losses.append(step.loss)
        timing.append((t, step.total_ms, step.sampling_ms))
        if t % config.snapshot_every == 0:
            write_snapshot_csv(trainer.sampler.potentials, run_dir / f"potentials_{t}.csv", train_data.class_ids)
        if t % config.eval_every == 0 or t == config.iterations:
            result = trainer.evaluate(test_data)
            row = MetricsRow(
                iteration=t,
                train_loss=float(np.mean(losses)),
                eval_accuracy_mean=result.accuracy_mean,
                eval_accuracy_ci95=result.accuracy_ci95,
                wall_time_ms=(time.perf_counter() - started) * 1000.0,
            )
            run.metrics.append(row)
            losses = []
            logger.info(
                "iteration %d: train loss %.4f, meta-test accuracy %.4f +- %.4f",
                t,
                row.train_loss,
                row.eval_accuracy_mean,
                row.eval_accuracy_ci95,
            )
            if t >= WARMUP_FRACTION * config.iterations and row.eval_accuracy_mean < 1.0 / config.k_way:
                logger.warning("accuracy %.4f is below chance after warm-up", row.eval_accuracy_mean)

    if isinstance(trainer.sampler, GreedyPairTaskSampler):
        run.recovery = potential_recovery(trainer.sampler.potentials, confusability_ground_truth(train_data, spec))
        logger.info(
            "potential recovery: spearman %.3f vs -distance, %.3f vs same supercluster",
            run.recovery.spearman_distance,
            run.recovery.spearman_same_supercluster,
        )
    _write_exports(run, timing)
    return run


def _write_exports(run: TrainingRun, timing: list) -> None:
    run_dir, trainer = run.run_dir, run.trainer
    metrics = pd.DataFrame([row.model_dump(exclude={"wall_time_ms"}) for row in run.metrics])
    metrics.to_csv(run_dir / "metrics.csv", index=False, float_format="%.10g")
    pd.DataFrame(timing, columns=["iteration", "wall_time_ms", "sampling_ms"]).to_csv(
        run_dir / "timing.csv", index=False, float_format="%.4f"
    )
    pd.DataFrame({"class_id": trainer.train_data.class_ids, "episodes": trainer.class_counts}).to_csv(
        run_dir / "class_counts.csv", index=False
    )
    save_weights_csv(trainer.embedding, run_dir / "weights.csv")

    prototypes = []
    for split, data in (("train", trainer.train_data), ("test", run.test_data)):
        frame = pd.DataFrame(class_prototypes(trainer.embedding, data))
        frame.columns = [f"e{i}" for i in frame.columns]
        frame.insert(0, "split", split)
        frame.insert(0, "class_id", data.class_ids)
        prototypes.append(frame)
    pd.concat(prototypes).to_csv(run_dir / "prototypes.csv", index=False, float_format="%.10g")

    if run.recovery is not None:
        pd.DataFrame([asdict(run.recovery)]).to_csv(run_dir / "recovery.csv", index=False, float_format="%.6f")
