"""Covariance-matrix-adaptation search over mapping-scheme parameter vectors.

The sampler is a standard (mu/mu_w, lambda) strategy: rank candidates by the
spec error, recombine the better half with log-decreasing weights, adapt the
two evolution paths, the covariance (rank-1 plus rank-mu) and the step size.
Degenerate states (no-effect axis, ill-conditioned covariance, vanishing
step) trigger a restart policy combining population doubling, mean
re-randomization and covariance reset.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .interpreter import Program, eliminate_dead_code, evaluate
from .iospec import Spec
from .mapping import MappingScheme, decode
from .registry import Registry
from .report import SynthesisReport
from .values import value_type

EIGENVALUE_FLOOR = 1e-20
CONDITION_LIMIT = 1e14
STEP_TOLERANCE = 1e-12
POPULATION_CAP_FACTOR = 2**10
MEAN_INIT_RANGE = 2.0


class StallReason:
    NO_EFFECT_AXIS = "no_effect_axis"
    CONDITION = "condition"
    TOL_X = "tol_x"


@dataclass(frozen=True)
class RestartPolicy:
    population: bool = False  # double lambda
    mean: bool = False        # re-randomize the mean
    covariance: bool = False  # reset covariance to identity

    @classmethod
    def none(cls) -> "RestartPolicy":
        return cls()

    @classmethod
    def ipop(cls) -> "RestartPolicy":
        return cls(population=True, mean=True, covariance=True)

    @classmethod
    def parse(cls, text: str) -> "RestartPolicy":
        s = text.strip().lower()
        if s == "none":
            return cls.none()
        if s == "ipop":
            return cls.ipop()
        flags = {"pb": False, "mb": False, "cb": False}
        for part in s.split("+"):
            if part not in flags:
                raise ValueError(f"unknown restart policy part: {part!r}")
            flags[part] = True
        return cls(population=flags["pb"], mean=flags["mb"], covariance=flags["cb"])

    def label(self) -> str:
        if self == RestartPolicy.ipop():
            return "ipop"
        parts = [n for n, on in (("pb", self.population), ("mb", self.mean), ("cb", self.covariance)) if on]
        return "+".join(parts) if parts else "none"


def default_popsize(dim: int) -> int:
    return 4 + int(3 * math.log(dim)) if dim > 1 else 4


class CmaState:
    """Search-distribution state plus the strategy constants derived from lambda."""

    def __init__(self, dim: int, mean: np.ndarray, sigma: float = 1.0, popsize: int | None = None):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.n = dim
        self.mean = np.array(mean, dtype=float)
        if self.mean.shape != (dim,):
            raise ValueError("mean must match the dimension")
        self.sigma = float(sigma)
        self.sigma0 = float(sigma)
        self.cov = np.eye(dim)
        self.p_sigma = np.zeros(dim)
        self.p_c = np.zeros(dim)
        self.lam = popsize if popsize is not None else default_popsize(dim)
        if self.lam < 4:
            raise ValueError("population size must be at least 4")
        self.lam0 = self.lam
        self.generation = 0
        self.restarts = 0
        self._decomposition: tuple[np.ndarray, np.ndarray] | None = None
        self._refresh_params()

    def _refresh_params(self) -> None:
        n, lam = self.n, self.lam
        mu = lam // 2
        raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        self.weights = raw / raw.sum()
        self.mu = mu
        self.mu_eff = 1.0 / np.sum(self.weights**2)
        self.c_sigma = (self.mu_eff + 2) / (n + self.mu_eff + 5)
        self.d_sigma = (
            1 + 2 * max(0.0, math.sqrt((self.mu_eff - 1) / (n + 1)) - 1) + self.c_sigma
        )
        self.c_c = (4 + self.mu_eff / n) / (n + 4 + 2 * self.mu_eff / n)
        self.c_1 = 2 / ((n + 1.3) ** 2 + self.mu_eff)
        self.c_mu = min(
            1 - self.c_1,
            2 * (self.mu_eff - 2 + 1 / self.mu_eff) / ((n + 2) ** 2 + self.mu_eff),
        )
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    def decomposition(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigenvalues, eigenbasis) of the covariance, repaired to stay positive."""
        if self._decomposition is not None:
            return self._decomposition
        self.cov = (self.cov + self.cov.T) / 2
        for attempt in range(2):
            try:
                vals, basis = np.linalg.eigh(self.cov)
            except np.linalg.LinAlgError:
                vals, basis = None, None
            if vals is not None and np.all(np.isfinite(vals)) and np.all(np.isfinite(basis)):
                if np.any(vals < EIGENVALUE_FLOOR):
                    vals = np.maximum(vals, EIGENVALUE_FLOOR)
                    self.cov = (basis * vals) @ basis.T
                self._decomposition = (vals, basis)
                return self._decomposition
            if attempt == 0:
                scale = float(np.trace(self.cov)) / self.n
                if not math.isfinite(scale) or scale <= 0:
                    scale = 1.0
                self.cov = np.eye(self.n) * scale
        raise RuntimeError("covariance decomposition failed twice; aborting run")

    def invalidate(self) -> None:
        self._decomposition = None


def initial_state(
    dim: int, rng: np.random.Generator, sigma: float = 1.0, popsize: int | None = None
) -> CmaState:
    mean = rng.uniform(-MEAN_INIT_RANGE, MEAN_INIT_RANGE, dim)
    return CmaState(dim, mean, sigma=sigma, popsize=popsize)


def cma_ask(state: CmaState, rng: np.random.Generator) -> np.ndarray:
    """Sample lambda vectors from N(mean, sigma^2 C)."""
    if state.sigma <= 0:
        raise ValueError("sigma must be positive")
    vals, basis = state.decomposition()
    z = rng.standard_normal((state.lam, state.n))
    return state.mean + state.sigma * (z * np.sqrt(vals)) @ basis.T


def cma_tell(state: CmaState, samples: np.ndarray, errors) -> CmaState:
    """Standard distribution update from one generation of ranked samples."""
    samples = np.asarray(samples, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if samples.shape != (state.lam, state.n) or errors.shape != (state.lam,):
        raise ValueError("samples/errors must match the population size")
    errors = np.where(np.isfinite(errors), errors, np.inf)
    order = np.argsort(errors, kind="stable")
    selected = samples[order[: state.mu]]

    old_mean = state.mean
    state.mean = state.weights @ selected
    y = (state.mean - old_mean) / state.sigma

    vals, basis = state.decomposition()
    inv_sqrt = (basis / np.sqrt(vals)) @ basis.T
    state.p_sigma = (1 - state.c_sigma) * state.p_sigma + math.sqrt(
        state.c_sigma * (2 - state.c_sigma) * state.mu_eff
    ) * (inv_sqrt @ y)

    gen1 = state.generation + 1
    ps_norm = float(np.linalg.norm(state.p_sigma))
    hsig = ps_norm / math.sqrt(
        1 - (1 - state.c_sigma) ** (2 * gen1)
    ) / state.chi_n < 1.4 + 2 / (state.n + 1)
    state.p_c = (1 - state.c_c) * state.p_c + hsig * math.sqrt(
        state.c_c * (2 - state.c_c) * state.mu_eff
    ) * y

    deltas = (selected - old_mean) / state.sigma
    rank_mu = (deltas.T * state.weights) @ deltas
    state.cov = (
        (1 - state.c_1 - state.c_mu) * state.cov
        + state.c_1
        * (np.outer(state.p_c, state.p_c) + (1 - hsig) * state.c_c * (2 - state.c_c) * state.cov)
        + state.c_mu * rank_mu
    )
    state.sigma *= math.exp((state.c_sigma / state.d_sigma) * (ps_norm / state.chi_n - 1))
    state.generation += 1
    state.invalidate()
    return state


def detect_stall(state: CmaState) -> str | None:
    """Degenerate-state probe; returns a StallReason constant or None."""
    vals, basis = state.decomposition()
    for i in range(state.n):
        step = 0.1 * state.sigma * math.sqrt(max(vals[i], 0.0)) * basis[:, i]
        if np.array_equal(state.mean + step, state.mean):
            return StallReason.NO_EFFECT_AXIS
    if float(vals[-1]) / float(vals[0]) > CONDITION_LIMIT:
        return StallReason.CONDITION
    if state.sigma * math.sqrt(float(np.max(np.diag(state.cov)))) < STEP_TOLERANCE:
        return StallReason.TOL_X
    return None


def apply_restart(state: CmaState, policy: RestartPolicy, rng: np.random.Generator) -> CmaState:
    """Reset step size and paths; flagged quantities are re-initialized too."""
    if policy.population:
        state.lam = min(2 * state.lam, POPULATION_CAP_FACTOR * state.lam0)
        state._refresh_params()
    if policy.mean:
        state.mean = rng.uniform(-MEAN_INIT_RANGE, MEAN_INIT_RANGE, state.n)
    if policy.covariance:
        state.cov = np.eye(state.n)
    state.sigma = state.sigma0
    state.p_sigma = np.zeros(state.n)
    state.p_c = np.zeros(state.n)
    state.restarts += 1
    state.invalidate()
    return state


# -- specification error -----------------------------------------------------

INT_DISTANCE_CAP = 64
TYPE_MISMATCH_PENALTY = 128


def levenshtein(a: list[int], b: list[int]) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    row = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        prev = row[0]
        row[0] = i
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = min(row[j] + 1, row[j - 1] + 1, prev + (x != y))
            prev = cur
    return row[-1]


def value_distance(got, expected) -> int:
    if value_type(got) != value_type(expected):
        return TYPE_MISMATCH_PENALTY
    if isinstance(got, list):
        return levenshtein(got, expected)
    return min(abs(got - expected), INT_DISTANCE_CAP)


def program_error(tokens: Program, spec: Spec, registry: Registry) -> int:
    """Summed output distance over the spec; zero iff the spec is satisfied."""
    return sum(
        value_distance(evaluate(tokens, i, registry)[0], o) for i, o in spec.examples
    )


# -- full synthesis loop -----------------------------------------------------


def synthesize_cma(
    spec: Spec,
    scheme: MappingScheme,
    policy: RestartPolicy,
    registry: Registry,
    seed: int = 0,
    time_budget_s: float | None = None,
    max_evaluations: int | None = None,
    sigma: float = 1.0,
    popsize: int | None = None,
) -> SynthesisReport:
    """Sample, decode, and rank by spec error until a zero-error program appears."""
    rng = np.random.default_rng(seed)
    state = initial_state(scheme.dimension, rng, sigma=sigma, popsize=popsize)
    start = time.monotonic()

    def out_of_budget() -> bool:
        if time_budget_s is not None and time.monotonic() - start >= time_budget_s:
            return True
        return max_evaluations is not None and evaluations >= max_evaluations

    evaluations = 0
    found: Program | None = None
    # Concentrated sampling re-decodes the same few programs over and over;
    # memoizing their errors costs nothing semantically and buys generations.
    error_cache: dict[tuple[int, ...], int] = {}
    while not out_of_budget():
        samples = cma_ask(state, rng)
        programs = [decode(scheme, x) for x in samples]
        errors = np.empty(len(programs))
        hit = None
        for i, prog in enumerate(programs):
            key = tuple(prog)
            err = error_cache.get(key)
            if err is None:
                err = program_error(prog, spec, registry)
                error_cache[key] = err
            errors[i] = err
            evaluations += 1
            if err == 0:
                hit = prog
                break
        if hit is not None:
            found = hit
            break
        cma_tell(state, samples, errors)
        if detect_stall(state) is not None:
            apply_restart(state, policy, rng)

    program = eliminate_dead_code(found, registry) if found is not None else None
    return SynthesisReport(
        engine="cma",
        found=program is not None,
        program=program,
        program_text=registry.format_program(program) if program is not None else None,
        generations=state.generation,
        evaluations=evaluations,
        restarts=state.restarts,
        seed=seed,
        wall_s=time.monotonic() - start,
    )
