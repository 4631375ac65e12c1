"""Genetic search over fixed-length token programs.

Each generation: every gene is checked against the spec, the survivors are
ranked by a fitness model, the top slice passes through unchanged, and the
remaining slots are refilled by roulette-selected crossover and model-guided
single-point mutation. Offspring are re-bred until dead-code elimination
preserves the full program length. When the mean fitness saturates, an
exhaustive single-replacement neighborhood search around the best genes runs
before evolution resumes.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from statistics import fmean
from typing import Callable, Sequence

from .interpreter import (
    Program,
    eliminate_dead_code,
    evaluate,
    random_program,
    satisfies,
)
from .iospec import Spec
from .models import FitnessModel, ModelUnavailableError
from .registry import Registry
from .report import SynthesisReport

ROULETTE_EPSILON = 1e-6
VALIDITY_RETRIES = 100


class NsMode(Enum):
    BFS = "bfs"
    DFS = "dfs"


@dataclass
class GaConfig:
    length: int
    population: int = 100
    elite_fraction: float = 0.20
    crossover_share: float = 0.70
    top_n: int = 3
    window: int = 5
    max_generations: int | None = None
    time_budget_s: float | None = None
    seed: int = 0
    ns_mode: NsMode = NsMode.BFS

    def __post_init__(self):
        if not 0 < self.elite_fraction < 1:
            raise ValueError("elite_fraction must be in (0, 1)")
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not 0 <= self.crossover_share <= 1:
            raise ValueError("crossover_share must be in [0, 1]")

    @property
    def elite_count(self) -> int:
        # ceil of the fraction, robust to float noise like 0.2 * 100 -> 20.000000000000004
        return math.ceil(self.elite_fraction * self.population - 1e-9)


@dataclass
class ScoredPopulation:
    """Genes with their scores, sorted best-first; ties keep insertion order."""

    genes: list[Program]
    scores: list[float]

    def __post_init__(self):
        if len(self.genes) != len(self.scores):
            raise ValueError("genes and scores must align")


@dataclass
class FitnessHistory:
    """Mean population score per completed generation, append-only."""

    means: list[float] = field(default_factory=list)

    def append(self, value: float) -> None:
        self.means.append(value)

    def reset(self) -> None:
        self.means.clear()

    def __len__(self) -> int:
        return len(self.means)


def init_population(config: GaConfig, rng: random.Random, registry: Registry) -> list[Program]:
    return [random_program(config.length, rng, registry) for _ in range(config.population)]


def gene_traces(gene: Program, spec: Spec, registry: Registry) -> list[list]:
    return [evaluate(gene, i, registry)[1] for i in spec.inputs()]


def rank(
    genes: Sequence[Program], spec: Spec, model: FitnessModel, registry: Registry
) -> ScoredPopulation:
    """Score every gene with the model and sort descending (stable)."""
    traces = [gene_traces(g, spec, registry) for g in genes]
    scores = model.score(spec, list(genes), traces)
    order = sorted(range(len(genes)), key=lambda i: -scores[i])
    return ScoredPopulation([list(genes[i]) for i in order], [scores[i] for i in order])


def _roulette(weights: Sequence[float], rng: random.Random) -> int:
    total = sum(weights)
    pick = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if pick < acc:
            return i
    return len(weights) - 1


def select_parent(scored: ScoredPopulation, rng: random.Random) -> int:
    """Roulette selection over min-shifted scores; returns the gene index."""
    low = min(scored.scores)
    return _roulette([s - low + ROULETTE_EPSILON for s in scored.scores], rng)


def crossover(a: Program, b: Program, rng: random.Random) -> Program:
    """Single random cut point; left of it from a, right of it from b."""
    if len(a) != len(b) or len(a) < 2:
        raise ValueError("crossover needs two genes of equal length >= 2")
    c = rng.randint(1, len(a) - 1)
    return a[:c] + b[c:]


def breed_crossover(
    scored: ScoredPopulation, rng: random.Random, registry: Registry, length: int
) -> Program:
    """Reselect parents and recombine until the child has no dead code."""
    ia = ib = 0
    for _ in range(VALIDITY_RETRIES):
        ia = select_parent(scored, rng)
        ib = select_parent(scored, rng)
        if length < 2:
            break
        child = crossover(scored.genes[ia], scored.genes[ib], rng)
        if len(eliminate_dead_code(child, registry)) == length:
            return child
    best = ia if scored.scores[ia] >= scored.scores[ib] else ib
    return list(scored.genes[best])


def mutate(
    gene: Program,
    rng: random.Random,
    model: FitnessModel,
    pmap: Sequence[float] | None,
    spec: Spec,
    registry: Registry,
) -> Program:
    """Model-picked single-point mutation.

    Samples a bounded set of (position, replacement) candidates - replacements
    drawn by roulette over the probability map when one is available - and
    returns the model's best-scoring dead-code-free mutant. Falls back to a
    uniform random valid mutant, and finally to the unchanged gene.
    """
    length = len(gene)
    size = len(registry)
    if size < 2:
        return list(gene)
    attempts = min(2 * length, 16)
    mutants: list[Program] = []
    for _ in range(attempts):
        k = rng.randrange(length)
        others = [z for z in range(size) if z != gene[k]]
        if pmap is not None:
            weights = [pmap[z] + ROULETTE_EPSILON for z in others]
            z_new = others[_roulette(weights, rng)]
        else:
            z_new = others[rng.randrange(len(others))]
        mutant = list(gene)
        mutant[k] = z_new
        if len(eliminate_dead_code(mutant, registry)) == length:
            mutants.append(mutant)
    if mutants:
        traces = [gene_traces(m, spec, registry) for m in mutants]
        scores = model.score(spec, mutants, traces)
        return mutants[max(range(len(mutants)), key=lambda i: (scores[i], -i))]
    for _ in range(VALIDITY_RETRIES):
        k = rng.randrange(length)
        others = [z for z in range(size) if z != gene[k]]
        mutant = list(gene)
        mutant[k] = others[rng.randrange(len(others))]
        if len(eliminate_dead_code(mutant, registry)) == length:
            return mutant
    return list(gene)


def ns_trigger(history: FitnessHistory, window: int) -> bool:
    """Saturation test: mean of the last `window` generation means has not
    beaten the mean of everything before them."""
    if len(history) <= window:
        return False
    recent = history.means[-window:]
    earlier = history.means[:-window]
    return fmean(recent) <= fmean(earlier)


def neighborhood_search(
    top: Sequence[Program],
    spec: Spec,
    registry: Registry,
    mode: NsMode,
    model: FitnessModel,
) -> tuple[Program | None, int]:
    """Single-token-replacement sweep around the top genes.

    Returns (hit, candidates tested). The unmodified genes themselves are
    never tested; callers check them before invoking the search. An
    unsuccessful sweep tests exactly N * L * (|registry| - 1) candidates in
    either mode.
    """
    if not top:
        raise ValueError("need at least one gene to search around")
    size = len(registry)
    tested = 0
    if mode is NsMode.BFS:
        for gene in top:
            for i in range(len(gene)):
                for op in range(size):
                    if op == gene[i]:
                        continue
                    cand = list(gene)
                    cand[i] = op
                    tested += 1
                    if satisfies(cand, spec, registry):
                        return cand, tested
        return None, tested
    for gene in top:
        work = list(gene)
        for depth in range(len(work)):
            variants = []
            for op in range(size):
                if op == work[depth]:
                    continue
                cand = list(work)
                cand[depth] = op
                tested += 1
                if satisfies(cand, spec, registry):
                    return cand, tested
                variants.append(cand)
            if depth + 1 < len(work):
                traces = [gene_traces(v, spec, registry) for v in variants]
                scores = model.score(spec, variants, traces)
                work = variants[max(range(len(variants)), key=lambda i: (scores[i], -i))]
    return None, tested


def _next_generation(
    scored: ScoredPopulation,
    config: GaConfig,
    rng: random.Random,
    model: FitnessModel,
    pmap: Sequence[float] | None,
    spec: Spec,
    registry: Registry,
) -> list[Program]:
    elites = [list(g) for g in scored.genes[: config.elite_count]]
    n_rest = config.population - len(elites)
    n_cross = round(config.crossover_share * n_rest)
    children = []
    for i in range(n_rest):
        if i < n_cross:
            children.append(breed_crossover(scored, rng, registry, config.length))
        else:
            parent = scored.genes[select_parent(scored, rng)]
            children.append(mutate(parent, rng, model, pmap, spec, registry))
    return elites + children


GenerationObserver = Callable[[int, ScoredPopulation], None]


def synthesize_ga(
    spec: Spec,
    config: GaConfig,
    model: FitnessModel,
    registry: Registry,
    observer: GenerationObserver | None = None,
) -> SynthesisReport:
    """Evolve until a program satisfies the spec or a budget runs out."""
    rng = random.Random(config.seed)
    start = time.monotonic()

    def out_of_budget() -> bool:
        return (
            config.time_budget_s is not None
            and time.monotonic() - start >= config.time_budget_s
        )

    evaluations = 0
    ns_invocations = 0
    generations = 0
    history = FitnessHistory()
    genes: list[Program] | None = None
    found: Program | None = None
    pmap: Sequence[float] | None = None
    pmap_ready = False

    while not out_of_budget():
        if config.max_generations is not None and generations >= config.max_generations:
            break
        genes = init_population(config, rng, registry) if genes is None else genes
        for gene in genes:
            evaluations += 1
            if satisfies(gene, spec, registry):
                found = gene
                break
        if found is not None:
            break
        scored = rank(genes, spec, model, registry)
        history.append(fmean(scored.scores))
        if observer is not None:
            observer(generations, scored)
        generations += 1
        if ns_trigger(history, config.window):
            ns_invocations += 1
            hit, tested = neighborhood_search(
                scored.genes[: config.top_n], spec, registry, config.ns_mode, model
            )
            evaluations += tested
            history.reset()
            if hit is not None:
                found = hit
                break
        if not pmap_ready:
            pmap = model.pmap(spec)
            if pmap is not None and len(pmap) != len(registry):
                raise ModelUnavailableError(
                    f"probability map length {len(pmap)} != registry size {len(registry)}"
                )
            pmap_ready = True
        genes = _next_generation(scored, config, rng, model, pmap, spec, registry)

    program = eliminate_dead_code(found, registry) if found is not None else None
    return SynthesisReport(
        engine="ga",
        found=program is not None,
        program=program,
        program_text=registry.format_program(program) if program is not None else None,
        generations=generations,
        evaluations=evaluations,
        ns_invocations=ns_invocations,
        seed=config.seed,
        wall_s=time.monotonic() - start,
    )
