import os
import sys
from pathlib import Path

# Add the parent directory to the path so we can import the package
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from tasksampler.config import configure_logging
from tasksampler.harness import bench_grid, bench_overhead, compare_strategies, run_training, verify_greedy_law
from tasksampler.schemas import RunConfig, SamplingStrategy


def reproduce(out: Path, num_seeds: int = 20):
    """Run the desk-scale study: verification, one snapshot run, strategy comparison, timing."""
    out.mkdir(parents=True, exist_ok=True)

    print("Verifying greedy vs exact class-pair laws...")
    report = verify_greedy_law(6, 3, 10, np.random.default_rng(0), draws=100_000)
    report.to_frame().to_csv(out / "greedy_law.csv", index=False, float_format="%.12g")
    print(f"Rows failing the chi-square check: {len(report.failing_rows())}")

    print("Training gcp-hard with potential snapshots...")
    run = run_training(RunConfig(strategy=SamplingStrategy.GCP_HARD, out=out / "train-gcp-hard"))
    print(f"Final accuracy: {run.final_metrics.eval_accuracy_mean:.4f}")
    if run.recovery:
        print(f"Spearman vs -center distance: {run.recovery.spearman_distance:.3f}")

    print("Comparing strategies...")
    summary = compare_strategies(RunConfig(), list(SamplingStrategy), list(range(num_seeds)), out / "compare")
    print(summary.to_string(index=False))

    print("Timing random vs gcp-hard...")
    timing = bench_overhead(RunConfig(), bench_grid([5, 10, 15, 20], [1, 5], [16, 64]))
    timing.to_csv(out / "timing.csv", index=False, float_format="%.6f")
    print(timing.to_string(index=False))


if __name__ == "__main__":
    configure_logging()
    reproduce(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/reproduce"))
