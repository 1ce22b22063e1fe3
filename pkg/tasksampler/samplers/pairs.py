"""Class-pair task distributions: the exact product-of-potentials law and
its greedy sequential sampler, plus the exact law the greedy sampler follows.
"""
import logging
from collections import defaultdict
from itertools import combinations
from math import comb, factorial
from typing import Dict, Optional

import numpy as np
from scipy.special import logsumexp

from tasksampler.config import settings
from tasksampler.errors import EnumerationCapError
from tasksampler.fewshot import CategorySet
from tasksampler.potentials import PotentialMatrix
from tasksampler.samplers.distributions import SetDistribution, SetKey
from tasksampler.utils import categorical_from_log

logger = logging.getLogger(__name__)

MAX_GREEDY_ENUMERATION_K = 6


def _check_k(matrix: PotentialMatrix, k: int, minimum: int) -> None:
    if not minimum <= k <= matrix.num_classes:
        raise ValueError(f"k={k} must lie in [{minimum}, {matrix.num_classes}]")


def sample_task_gcp(matrix: PotentialMatrix, k: int, rng: np.random.Generator) -> CategorySet:
    """Greedy class-pair draw of a k-class category set.

    An unordered pair is drawn with probability proportional to C(i, j); each
    later class c is drawn proportional to the product of C(c, j) over the
    classes already chosen. The running log score per candidate grows by one
    row of the matrix per step.
    """
    _check_k(matrix, k, 2)
    table = matrix.log_potentials
    rows, cols, pair_logs = matrix.upper_triangle()
    first = categorical_from_log(pair_logs, rng)
    chosen = [int(rows[first]), int(cols[first])]

    scores = table[chosen[0]] + table[chosen[1]]
    scores[chosen] = -np.inf
    for _ in range(k - 2):
        c = categorical_from_log(scores, rng)
        chosen.append(c)
        scores += table[c]
        scores[c] = -np.inf
    return CategorySet(tuple(chosen))


def exact_cp_distribution(matrix: PotentialMatrix, k: int, cap: Optional[int] = None) -> SetDistribution:
    """P(L) proportional to the product of C(i, j) over pairs inside L, by enumeration."""
    _check_k(matrix, k, 1)
    cap = settings.enumeration_cap if cap is None else cap
    total = comb(matrix.num_classes, k)
    if total > cap:
        raise EnumerationCapError(f"C({matrix.num_classes}, {k}) = {total} sets exceeds the cap of {cap}")

    subsets = np.array(list(combinations(range(matrix.num_classes), k)), dtype=np.int64).reshape(total, k)
    log_scores = np.zeros(total)
    for a, b in combinations(range(k), 2):
        log_scores += matrix.log_potentials[subsets[:, a], subsets[:, b]]
    probs = np.exp(log_scores - logsumexp(log_scores))
    return SetDistribution(matrix.num_classes, k, dict(zip(map(tuple, subsets.tolist()), probs.tolist())))


def exact_gcp_distribution(matrix: PotentialMatrix, k: int, cap: Optional[int] = None) -> SetDistribution:
    """Exact law of `sample_task_gcp`.

    Summing the per-step normalized probabilities over every ordering of a set
    is done one step at a time: the next-class conditional depends only on
    which classes are already chosen, so orderings sharing a chosen prefix set
    are merged before extending them.
    """
    _check_k(matrix, k, 2)
    cap = settings.enumeration_cap if cap is None else cap
    if k > MAX_GREEDY_ENUMERATION_K:
        raise EnumerationCapError(f"greedy enumeration supports k <= {MAX_GREEDY_ENUMERATION_K}, got {k}")
    orderings = comb(matrix.num_classes, k) * factorial(k) // 2
    if orderings > cap:
        raise EnumerationCapError(f"{orderings} greedy orderings exceeds the cap of {cap}")

    table = matrix.log_potentials
    rows, cols, pair_logs = matrix.upper_triangle()
    pair_probs = np.exp(pair_logs - logsumexp(pair_logs))
    layer: Dict[SetKey, float] = {(int(i), int(j)): float(p) for i, j, p in zip(rows, cols, pair_probs)}

    for _ in range(k - 2):
        extended: Dict[SetKey, float] = defaultdict(float)
        for chosen, p_chosen in layer.items():
            members = list(chosen)
            scores = table[members].sum(axis=0)
            scores[members] = -np.inf
            conditional = np.exp(scores - logsumexp(scores))
            for c in np.flatnonzero(np.isfinite(scores)):
                extended[tuple(sorted(members + [int(c)]))] += p_chosen * conditional[c]
        layer = extended
    return SetDistribution(matrix.num_classes, k, dict(sorted(layer.items())))
