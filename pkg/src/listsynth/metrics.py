"""Closeness metrics between candidate and target programs.

Three metrics grade how near a candidate is to a (known or estimated) target:
the count of shared distinct tokens, the longest common subsequence or
substring of the token sequences, and the probability-map sum. The map-based
metric also works without any target, given per-token membership
probabilities from a model or from corpus frequencies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .interpreter import random_program
from .registry import Registry


class LcsMode(Enum):
    SUBSEQUENCE = "subsequence"
    SUBSTRING = "substring"


class Metric(Enum):
    CF = "cf"
    LCS = "lcs"
    FP = "fp"
    MODEL = "model"


@dataclass(frozen=True)
class FitnessScore:
    value: float
    kind: Metric


def fitness_cf(candidate: Sequence[int], target: Sequence[int]) -> int:
    """Number of distinct tokens the two programs share."""
    if not candidate or not target:
        raise ValueError("programs must be non-empty")
    return len(set(candidate) & set(target))


def fitness_lcs(
    candidate: Sequence[int],
    target: Sequence[int],
    mode: LcsMode = LcsMode.SUBSTRING,
) -> int:
    """Length of the longest common subsequence (or contiguous substring)."""
    if not candidate or not target:
        raise ValueError("programs must be non-empty")
    a, b = candidate, target
    if mode is LcsMode.SUBSTRING:
        best = 0
        row = [0] * (len(b) + 1)
        for x in a:
            new = [0] * (len(b) + 1)
            for j, y in enumerate(b):
                if x == y:
                    new[j + 1] = row[j] + 1
                    best = max(best, new[j + 1])
            row = new
        return best
    row = [0] * (len(b) + 1)
    for x in a:
        prev_diag = 0
        for j, y in enumerate(b):
            cur = row[j + 1]
            row[j + 1] = prev_diag + 1 if x == y else max(row[j + 1], row[j])
            prev_diag = cur
    return row[-1]


def fitness_fp(candidate: Sequence[int], pmap: Sequence[float]) -> float:
    """Sum of map probabilities over the candidate's distinct tokens."""
    if not candidate:
        raise ValueError("programs must be non-empty")
    for tid in set(candidate):
        if not 0 <= tid < len(pmap):
            raise ValueError(f"token id {tid} outside probability map")
    return float(sum(pmap[tid] for tid in set(candidate)))


def membership_pmap(target: Sequence[int], size: int) -> list[float]:
    """Indicator map: 1.0 for tokens present in the target, else 0.0."""
    present = set(target)
    return [1.0 if i in present else 0.0 for i in range(size)]


def frequency_pmap(
    registry: Registry,
    length: int,
    rng: random.Random,
    samples: int = 10_000,
) -> list[float]:
    """Fallback map: fraction of random programs containing each token."""
    counts = [0] * len(registry)
    for _ in range(samples):
        for tid in set(random_program(length, rng, registry)):
            counts[tid] += 1
    return [c / samples for c in counts]


def oracle_fitness(
    spec,
    candidate: Sequence[int],
    target: Sequence[int],
    metric: Metric,
    lcs_mode: LcsMode = LcsMode.SUBSTRING,
) -> FitnessScore:
    """Exact metric against a known target; usable in benchmark mode only."""
    if metric is Metric.CF:
        return FitnessScore(float(fitness_cf(candidate, target)), Metric.CF)
    if metric is Metric.LCS:
        return FitnessScore(float(fitness_lcs(candidate, target, lcs_mode)), Metric.LCS)
    if metric is Metric.FP:
        pmap = membership_pmap(target, max(max(candidate), max(target)) + 1)
        return FitnessScore(fitness_fp(candidate, pmap), Metric.FP)
    raise ValueError(f"not an oracle metric: {metric}")
