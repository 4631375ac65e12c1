import math
from functools import lru_cache

import numpy as np
import pytest

from listsynth.cma import (
    CmaState,
    RestartPolicy,
    StallReason,
    apply_restart,
    cma_ask,
    cma_tell,
    detect_stall,
    initial_state,
    levenshtein,
    program_error,
    synthesize_cma,
    value_distance,
)
from listsynth.interpreter import evaluate, random_program, satisfies
from listsynth.iospec import Spec
from listsynth.mapping import MappingScheme, SchemeKind
from listsynth.traindata import random_input


def edit_distance_oracle(a, b):
    """Memoized recursive edit distance, independent of the DP implementation."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
            go(i + 1, j + 1) + (a[i] != b[j]),
        )

    return go(0, 0)


# -- sampling ----------------------------------------------------------------


def test_ask_matches_distribution():
    state = CmaState(4, np.zeros(4), sigma=1.0, popsize=500)
    rng = np.random.default_rng(1)
    draws = np.concatenate([cma_ask(state, rng) for _ in range(200)])
    assert draws.shape == (100_000, 4)
    assert np.all(np.abs(draws.mean(axis=0)) < 0.02)
    assert np.all(np.abs(draws.std(axis=0) - 1.0) < 0.02)


def test_ask_deterministic():
    state_a = CmaState(3, np.ones(3))
    state_b = CmaState(3, np.ones(3))
    a = cma_ask(state_a, np.random.default_rng(7))
    b = cma_ask(state_b, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_sigma_must_be_positive():
    with pytest.raises(ValueError):
        CmaState(3, np.zeros(3), sigma=0.0)
    state = CmaState(3, np.zeros(3))
    state.sigma = 0.0
    with pytest.raises(ValueError):
        cma_ask(state, np.random.default_rng(0))


def test_tell_population_mismatch():
    state = CmaState(3, np.zeros(3), popsize=8)
    with pytest.raises(ValueError):
        cma_tell(state, np.zeros((5, 3)), np.zeros(5))


def test_tell_equal_errors_keeps_mean_close():
    rng = np.random.default_rng(3)
    drift = 0.0
    for _ in range(100):
        state = CmaState(6, np.zeros(6), popsize=12)
        samples = cma_ask(state, rng)
        cma_tell(state, samples, np.zeros(12))
        drift += float(np.linalg.norm(state.mean))
    assert drift / 100 <= 1.0 * 6  # sigma * n


def test_tell_nonfinite_errors_rank_worst():
    state = CmaState(2, np.zeros(2), popsize=6)
    samples = np.array([[9.0, 9.0], [0.1, 0.1], [9.0, 9.0], [0.2, 0.2], [0.1, 0.2], [9.0, 8.0]])
    errors = [float("nan"), 0.0, float("inf"), 0.1, 0.05, float("inf")]
    cma_tell(state, samples, errors)
    # The mean moves toward the finite-error points near (0.1, 0.1).
    assert np.all(state.mean < 1.0)


def test_sphere_converges():
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        state = initial_state(10, rng)
        evals = 0
        while float(state.mean @ state.mean) >= 1e-8:
            samples = cma_ask(state, rng)
            errors = np.sum(samples**2, axis=1)
            evals += len(samples)
            cma_tell(state, samples, errors)
            assert evals <= 5000, "sphere did not converge within budget"


def test_sphere_best_so_far_improves_every_window():
    rng = np.random.default_rng(4)
    state = initial_state(10, rng)
    best_at_eval = []  # (evals, best f(mean) so far)
    evals = 0
    best = float(state.mean @ state.mean)
    while best >= 1e-8:
        samples = cma_ask(state, rng)
        evals += len(samples)
        cma_tell(state, samples, np.sum(samples**2, axis=1))
        best = min(best, float(state.mean @ state.mean))
        best_at_eval.append((evals, best))
    for start_evals, start_best in best_at_eval:
        later = [b for e, b in best_at_eval if e >= start_evals + 500]
        if later and start_best >= 1e-8:
            assert later[0] < start_best


# -- stall detection and restarts ---------------------------------------------


def test_detect_stall_fresh_state_is_healthy():
    assert detect_stall(CmaState(4, np.zeros(4))) is None


def test_detect_stall_tol_x():
    state = CmaState(4, np.zeros(4))
    state.sigma = 1e-13
    assert detect_stall(state) == StallReason.TOL_X


def test_detect_stall_condition():
    state = CmaState(2, np.zeros(2))
    state.cov = np.diag([1.0, 1e-15])
    state.invalidate()
    assert detect_stall(state) == StallReason.CONDITION


def test_detect_stall_no_effect_axis():
    state = CmaState(2, np.full(2, 1e20))
    state.sigma = 1e-3
    assert detect_stall(state) == StallReason.NO_EFFECT_AXIS


def test_restart_pb():
    rng = np.random.default_rng(0)
    state = CmaState(3, np.arange(3.0), popsize=16)
    state.cov = np.diag([1.0, 2.0, 3.0])
    before_mean, before_cov = state.mean.copy(), state.cov.copy()
    apply_restart(state, RestartPolicy(population=True), rng)
    assert state.lam == 32
    assert np.array_equal(state.mean, before_mean)
    assert np.array_equal(state.cov, before_cov)
    assert state.restarts == 1


def test_restart_population_cap():
    rng = np.random.default_rng(0)
    state = CmaState(2, np.zeros(2), popsize=4)
    for _ in range(15):
        apply_restart(state, RestartPolicy(population=True), rng)
    assert state.lam == 4 * 2**10


def test_restart_mb_changes_mean():
    rng = np.random.default_rng(1)
    state = CmaState(5, np.zeros(5))
    apply_restart(state, RestartPolicy(mean=True), rng)
    assert not np.array_equal(state.mean, np.zeros(5))
    assert np.all(np.abs(state.mean) <= 2.0)


def test_restart_cb_resets_covariance():
    rng = np.random.default_rng(2)
    state = CmaState(3, np.zeros(3))
    state.cov = np.diag([5.0, 0.1, 2.0])
    apply_restart(state, RestartPolicy(covariance=True), rng)
    assert np.array_equal(state.cov, np.eye(3))


def test_restart_ipop_does_all_three():
    rng = np.random.default_rng(3)
    state = CmaState(4, np.zeros(4), popsize=8)
    state.cov = np.diag([4.0, 3.0, 2.0, 1.0])
    state.sigma = 1e-9
    state.p_sigma = np.ones(4)
    apply_restart(state, RestartPolicy.ipop(), rng)
    assert state.lam == 16
    assert not np.array_equal(state.mean, np.zeros(4))
    assert np.array_equal(state.cov, np.eye(4))
    assert state.sigma == state.sigma0
    assert np.array_equal(state.p_sigma, np.zeros(4))


def test_restart_none_resets_step_only():
    rng = np.random.default_rng(4)
    state = CmaState(2, np.ones(2), popsize=6)
    state.sigma = 1e-13
    cov = state.cov.copy()
    apply_restart(state, RestartPolicy.none(), rng)
    assert state.sigma == state.sigma0
    assert state.lam == 6
    assert np.array_equal(state.cov, cov)


def test_policy_parse():
    assert RestartPolicy.parse("ipop") == RestartPolicy(True, True, True)
    assert RestartPolicy.parse("pb+cb") == RestartPolicy(True, False, True)
    assert RestartPolicy.parse("none") == RestartPolicy()
    assert RestartPolicy.parse("MB") == RestartPolicy(mean=True)
    with pytest.raises(ValueError):
        RestartPolicy.parse("xx")
    assert RestartPolicy.parse("pb+mb+cb").label() == "ipop"


# -- spec error ----------------------------------------------------------------


def test_value_distance_cases():
    assert value_distance([1, 2, 3], [1, 2]) == 1
    assert value_distance([6, 20], [20, 10, 6, 4]) == 3
    assert value_distance(5, 9) == 4
    assert value_distance(5, 500) == 64
    assert value_distance(5, [5]) == 128
    assert value_distance([], []) == 0


def test_levenshtein_against_oracle(rng):
    for _ in range(200):
        a = [rng.randint(0, 4) for _ in range(rng.randint(0, 7))]
        b = [rng.randint(0, 4) for _ in range(rng.randint(0, 7))]
        assert levenshtein(a, b) == edit_distance_oracle(tuple(a), tuple(b))


def test_program_error_zero_iff_satisfies(registry, table1_program):
    spec = Spec.from_pairs([([-2, 10, 3, -4, 5, 2], [20, 10, 6, 4])])
    assert program_error(table1_program, spec, registry) == 0
    assert satisfies(table1_program, spec, registry)
    other = [registry.id_of("SORT")]
    assert program_error(other, spec, registry) > 0
    assert not satisfies(other, spec, registry)


# -- synthesis -----------------------------------------------------------------


def test_synthesize_zero_budget(registry, rng):
    target = random_program(1, rng, registry)
    inputs = [random_input(rng) for _ in range(5)]
    spec = Spec.from_pairs([(i, evaluate(target, i, registry)[0]) for i in inputs])
    scheme = MappingScheme(SchemeKind.BIN, 1, len(registry))
    report = synthesize_cma(spec, scheme, RestartPolicy.ipop(), registry, time_budget_s=0.0)
    assert not report.found and report.evaluations == 0 and report.generations == 0


def test_synthesize_found_program_satisfies(registry, rng):
    hits = 0
    for seed in range(50):
        import random as pyrandom

        prng = pyrandom.Random(2000 + seed)
        target = random_program(1, prng, registry)
        inputs = [random_input(prng) for _ in range(5)]
        spec = Spec.from_pairs([(i, evaluate(target, i, registry)[0]) for i in inputs])
        scheme = MappingScheme(SchemeKind.BIN, 1, len(registry))
        report = synthesize_cma(
            spec, scheme, RestartPolicy.ipop(), registry, seed=seed, time_budget_s=10.0
        )
        if report.found:
            hits += 1
            assert satisfies(report.program, spec, registry)
    assert hits >= 45


def test_synthesize_reproducible(registry, rng):
    target = random_program(2, rng, registry)
    inputs = [random_input(rng) for _ in range(5)]
    spec = Spec.from_pairs([(i, evaluate(target, i, registry)[0]) for i in inputs])
    scheme = MappingScheme(SchemeKind.BIN, 2, len(registry))
    a = synthesize_cma(spec, scheme, RestartPolicy.ipop(), registry, seed=5, time_budget_s=30)
    b = synthesize_cma(spec, scheme, RestartPolicy.ipop(), registry, seed=5, time_budget_s=30)
    assert a.to_json_dict() == b.to_json_dict()
