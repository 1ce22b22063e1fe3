from tasksampler.samplers.distributions import (
    ChiSquareResult,
    SetDistribution,
    chi_square,
    distribution_distance,
    empirical_distribution,
    write_distribution_csv,
)
from tasksampler.samplers.pairs import exact_cp_distribution, exact_gcp_distribution, sample_task_gcp
from tasksampler.samplers.tasks import (
    ClassTaskSampler,
    GreedyPairTaskSampler,
    TaskSampler,
    UniformTaskSampler,
    make_task_sampler,
)
from tasksampler.samplers.weights import (
    ClassWeights,
    InstanceWeights,
    class_weight_update,
    instance_weight_update,
    sample_classes_without_replacement,
)

__all__ = [
    "ChiSquareResult",
    "SetDistribution",
    "chi_square",
    "distribution_distance",
    "empirical_distribution",
    "write_distribution_csv",
    "exact_cp_distribution",
    "exact_gcp_distribution",
    "sample_task_gcp",
    "ClassTaskSampler",
    "GreedyPairTaskSampler",
    "TaskSampler",
    "UniformTaskSampler",
    "make_task_sampler",
    "ClassWeights",
    "InstanceWeights",
    "class_weight_update",
    "instance_weight_update",
    "sample_classes_without_replacement",
]
