import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from listsynth.iospec import Spec
from listsynth.metrics import (
    LcsMode,
    Metric,
    fitness_cf,
    fitness_fp,
    fitness_lcs,
    frequency_pmap,
    membership_pmap,
    oracle_fitness,
)

programs = st.lists(st.integers(0, 9), min_size=1, max_size=6)


def brute_force_lcs(a, b):
    """Independent oracle: enumerate every subsequence of the shorter side."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for r in range(len(short), 0, -1):
        for combo in itertools.combinations(short, r):
            it = iter(long_)
            if all(x in it for x in combo):
                return r
    return best


def test_worked_example_cf(worked_pair):
    candidate, target = worked_pair
    assert fitness_cf(candidate, target) == 3


def test_worked_example_lcs(worked_pair):
    candidate, target = worked_pair
    assert fitness_lcs(candidate, target, LcsMode.SUBSTRING) == 2
    assert fitness_lcs(candidate, target, LcsMode.SUBSEQUENCE) == 3
    assert fitness_lcs(candidate, target) == 2  # substring is the default


def test_cf_trivia(worked_pair):
    _, target = worked_pair
    assert fitness_cf(target, target) == len(set(target))
    assert fitness_cf([1, 1, 2], [3, 4]) == 0
    with pytest.raises(ValueError):
        fitness_cf([], [1])


@given(programs, programs)
def test_cf_bounds_and_symmetry(a, b):
    v = fitness_cf(a, b)
    assert v == fitness_cf(b, a)
    assert 0 <= v <= min(len(set(a)), len(set(b)))


@given(programs, programs)
def test_lcs_modes_agree_with_oracle_and_order(a, b):
    sub = fitness_lcs(a, b, LcsMode.SUBSEQUENCE)
    run = fitness_lcs(a, b, LcsMode.SUBSTRING)
    assert sub == brute_force_lcs(a, b)
    assert run <= sub <= min(len(a), len(b))
    assert sub == fitness_lcs(b, a, LcsMode.SUBSEQUENCE)
    assert run == fitness_lcs(b, a, LcsMode.SUBSTRING)


def test_lcs_identity(worked_pair):
    _, target = worked_pair
    for mode in LcsMode:
        assert fitness_lcs(target, target, mode) == len(target)


def test_fp_basics():
    assert fitness_fp([0, 1, 2], [0.0] * 5) == 0.0
    assert fitness_fp([3, 3, 3], [0, 0, 0, 1.0, 0]) == 1.0
    with pytest.raises(ValueError):
        fitness_fp([9], [0.5])


def test_fp_indicator_matches_cf(rng):
    for _ in range(100):
        a = [rng.randrange(20) for _ in range(rng.randint(1, 6))]
        b = [rng.randrange(20) for _ in range(rng.randint(1, 6))]
        assert fitness_fp(a, membership_pmap(b, 20)) == fitness_cf(a, b)


@given(programs, st.integers(0, 9))
def test_fp_monotone(a, extra):
    pmap = [i / 10 for i in range(10)]
    assert fitness_fp(a + [extra], pmap) >= fitness_fp(a, pmap)


def test_frequency_pmap(registry):
    pm = frequency_pmap(registry, 3, random.Random(5), samples=400)
    assert len(pm) == len(registry)
    assert all(0.0 <= p <= 1.0 for p in pm)
    assert sum(pm) > 0
    again = frequency_pmap(registry, 3, random.Random(5), samples=400)
    assert pm == again


def test_oracle_fitness(worked_pair):
    candidate, target = worked_pair
    spec = Spec.from_pairs([([1], [1])])
    assert oracle_fitness(spec, candidate, target, Metric.CF).value == 3.0
    assert oracle_fitness(spec, target, target, Metric.LCS).value == len(target)
    fp = oracle_fitness(spec, candidate, target, Metric.FP)
    assert fp.value == 3.0 and fp.kind is Metric.FP
