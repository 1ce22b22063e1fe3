from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# Enums
class Strategy(str, Enum):
    HARD = "hard"
    EASY = "easy"
    UNCERTAIN = "uncertain"


class SamplingStrategy(str, Enum):
    RANDOM = "random"
    C_HARD = "c-hard"
    GCP_HARD = "gcp-hard"
    GCP_EASY = "gcp-easy"
    GCP_UNCERTAIN = "gcp-uncertain"

    @property
    def pair_strategy(self) -> Optional[Strategy]:
        """Difficulty transform used by the gcp strategies, None otherwise."""
        if self.value.startswith("gcp-"):
            return Strategy(self.value.split("-", 1)[1])
        return None


class ExponentRule(str, Enum):
    ALPHA = "alpha"
    ALPHA_ROOT = "alpha-root"


class PotentialDecay(str, Enum):
    EPISODE = "episode"
    GLOBAL = "global"


# Synthetic data schemas
class ClusterSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_classes: int = Field(25, ge=2)
    points_per_class: int = Field(60, ge=2)
    dim: int = Field(16, ge=1)
    num_superclusters: int = Field(5, ge=1)
    within_supercluster_spread: float = Field(1.0, gt=0)
    between_supercluster_spread: float = Field(8.0, gt=0)
    noise_sigma: float = Field(0.7, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_geometry(self) -> "ClusterSpec":
        if self.between_supercluster_spread <= self.within_supercluster_spread:
            raise ValueError("between_supercluster_spread must exceed within_supercluster_spread")
        if self.num_superclusters > self.num_classes:
            raise ValueError("num_superclusters cannot exceed num_classes")
        return self


# Run schemas
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    iterations: int = Field(600, ge=1)
    k_way: int = Field(5, ge=2)
    m_shot: int = Field(5, ge=1)
    n_query: int = Field(15, ge=1)
    alpha: float = Field(1.0, gt=0)
    tau: float = Field(0.5, ge=0, le=1)
    strategy: SamplingStrategy = SamplingStrategy.GCP_HARD
    exponent_rule: ExponentRule = ExponentRule.ALPHA
    potential_decay: PotentialDecay = PotentialDecay.EPISODE

    # synthetic dataset
    num_classes: int = Field(25, ge=4)
    points_per_class: int = Field(60, ge=2)
    dim: int = Field(16, ge=1)
    num_superclusters: int = Field(5, ge=1)
    within_supercluster_spread: float = Field(1.0, gt=0)
    between_supercluster_spread: float = Field(8.0, gt=0)
    noise_sigma: float = Field(0.7, gt=0)
    train_fraction: float = Field(0.8, gt=0, lt=1)

    # learner
    embed_dim: int = Field(16, ge=1)
    learning_rate: float = Field(0.01, ge=0)
    init_scale: float = Field(0.1, gt=0)

    # reporting
    eval_every: int = Field(100, ge=1)
    snapshot_every: int = Field(40, ge=1)
    eval_episodes: int = Field(1000, ge=2)
    out: Optional[Path] = None

    @property
    def num_train_classes(self) -> int:
        return int(round(self.num_classes * self.train_fraction))

    @model_validator(mode="after")
    def check_episode_fits(self) -> "RunConfig":
        if self.m_shot + self.n_query > self.points_per_class:
            raise ValueError(
                f"m_shot + n_query = {self.m_shot + self.n_query} exceeds points_per_class = {self.points_per_class}"
            )
        num_test = self.num_classes - self.num_train_classes
        if min(self.num_train_classes, num_test) < self.k_way:
            raise ValueError(
                f"meta split {self.num_train_classes}/{num_test} leaves a side with fewer than k_way={self.k_way} classes"
            )
        return self

    def cluster_spec(self) -> ClusterSpec:
        return ClusterSpec(
            num_classes=self.num_classes,
            points_per_class=self.points_per_class,
            dim=self.dim,
            num_superclusters=self.num_superclusters,
            within_supercluster_spread=self.within_supercluster_spread,
            between_supercluster_spread=self.between_supercluster_spread,
            noise_sigma=self.noise_sigma,
            seed=self.seed,
        )

    def to_echo(self) -> str:
        """Render as flat key=value lines, readable back through --config."""
        lines = []
        for name, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, Enum):
                value = value.value
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"


# Report schemas
class MetricsRow(BaseModel):
    iteration: int
    train_loss: float
    eval_accuracy_mean: float = Field(ge=0, le=1)
    eval_accuracy_ci95: float = Field(ge=0)
    wall_time_ms: float = Field(ge=0)


class LawComparisonRow(BaseModel):
    matrix: str
    num_classes: int
    k: int
    tv_distance: float
    max_abs_difference: float
    chi_square: float
    degrees_of_freedom: int
    p_value: float
    p_cp_first: float
    p_gcp_first: float


class TimingRow(BaseModel):
    k_way: int
    m_shot: int
    embed_dim: int
    random_ms: float
    gcp_ms: float
    factor: float
    random_sampling_ms: float
    gcp_sampling_ms: float


class StrategySummaryRow(BaseModel):
    strategy: SamplingStrategy
    seeds: int
    accuracy_mean: float
    accuracy_ci95: float
    paired_p_value: Optional[float] = None
