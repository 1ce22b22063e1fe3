"""Per-iteration time cost of gcp-sampling against uniform task sampling."""
import logging
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from tasksampler.harness.training import Trainer
from tasksampler.schemas import RunConfig, SamplingStrategy, TimingRow
from tasksampler.synthdata import generate

logger = logging.getLogger(__name__)

BenchPoint = Tuple[int, int, int]
BENCH_STRATEGIES = (SamplingStrategy.RANDOM, SamplingStrategy.GCP_HARD)


def bench_grid(ks: Sequence[int], shots: Sequence[int], embed_dims: Sequence[int]) -> list:
    return [(k, m, e) for e in embed_dims for m in shots for k in ks]


def _interleaved_timings(
    trainers: Dict[SamplingStrategy, Trainer], iterations: int, warmup: int, rounds: int
) -> Dict[SamplingStrategy, Tuple[float, float]]:
    """Median (total_ms, sampling_ms) per iteration for each trainer.

    The iterations are split into `rounds` blocks that alternate between the
    trainers, with the order flipped every round, so drifts in machine load
    hit every strategy alike.
    """
    for trainer in trainers.values():
        for _ in range(warmup):
            trainer.step()
    block = max(1, iterations // rounds)
    totals: Dict[SamplingStrategy, List[float]] = {s: [] for s in trainers}
    sampling: Dict[SamplingStrategy, List[float]] = {s: [] for s in trainers}
    order = list(trainers)
    for round_index in range(rounds):
        for strategy in order if round_index % 2 == 0 else reversed(order):
            trainer = trainers[strategy]
            for _ in range(block):
                step = trainer.step()
                totals[strategy].append(step.total_ms)
                sampling[strategy].append(step.sampling_ms)
    return {s: (float(np.median(totals[s])), float(np.median(sampling[s]))) for s in trainers}


def bench_overhead(
    config: RunConfig,
    grid: Iterable[BenchPoint],
    iterations: int = 200,
    warmup: int = 20,
    rounds: int = 10,
) -> pd.DataFrame:
    """Median milliseconds per training iteration for random vs gcp-hard.

    Every grid point (k_way, m_shot, embed_dim) trains on all classes of the
    synthetic dataset; there is no meta-test split or evaluation. The
    sampling columns isolate drawing the task and updating the sampler.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be positive, got {rounds}")
    dataset = generate(config.cluster_spec())
    rows = []
    for k, m, e in grid:
        if k > dataset.num_classes:
            raise ValueError(f"{k}-way tasks need more than {dataset.num_classes} classes")
        trainers = {
            strategy: Trainer(
                config.model_copy(update={"k_way": k, "m_shot": m, "embed_dim": e, "strategy": strategy}), dataset
            )
            for strategy in BENCH_STRATEGIES
        }
        timings = _interleaved_timings(trainers, iterations, warmup, rounds)
        random_ms, random_sampling = timings[SamplingStrategy.RANDOM]
        gcp_ms, gcp_sampling = timings[SamplingStrategy.GCP_HARD]
        row = TimingRow(
            k_way=k,
            m_shot=m,
            embed_dim=e,
            random_ms=random_ms,
            gcp_ms=gcp_ms,
            factor=gcp_ms / random_ms,
            random_sampling_ms=random_sampling,
            gcp_sampling_ms=gcp_sampling,
        )
        logger.info("k=%d m=%d e=%d: random %.3f ms, gcp %.3f ms, factor %.3f", k, m, e, random_ms, gcp_ms, row.factor)
        rows.append(row)
    return pd.DataFrame([row.model_dump() for row in rows])
