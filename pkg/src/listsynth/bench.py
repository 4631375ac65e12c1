"""Experiment harness: engines x problems with derived seeds and row streaming.

Every (problem, engine) pair runs with an independently derived seed, rows
stream to the caller as runs finish, and aggregation re-verifies each claimed
solution against its spec before computing per-engine synthesis rates.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean, median
from typing import Callable, Sequence

from .cma import RestartPolicy, synthesize_cma
from .ga import GaConfig, NsMode, synthesize_ga
from .hashing import fnv1a_64
from .interpreter import eliminate_dead_code, satisfies
from .mapping import MappingScheme, SchemeKind
from .metrics import LcsMode, Metric
from .models import ExternalModelClient, OracleFitness, UniformFitness
from .problems import Problem
from .registry import Registry
from .report import SynthesisReport


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class EngineSpec:
    id: str
    engine: str  # "ga" | "cma" | "planted"
    params: dict

    @classmethod
    def from_obj(cls, obj: dict) -> "EngineSpec":
        if "id" not in obj or "engine" not in obj:
            raise BenchError("engine config objects need 'id' and 'engine'")
        params = {k: v for k, v in obj.items() if k not in ("id", "engine")}
        return cls(id=str(obj["id"]), engine=str(obj["engine"]), params=params)


def load_engines(path) -> list[EngineSpec]:
    data = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(data, list) or not data:
        raise BenchError("engine config file must be a non-empty JSON array")
    engines = [EngineSpec.from_obj(o) for o in data]
    ids = [e.id for e in engines]
    if len(set(ids)) != len(ids):
        raise BenchError("duplicate engine ids")
    return engines


@dataclass
class BenchRow:
    problem: str
    engine: str
    params: dict
    found: bool
    program: list[int] | None
    evaluations: int
    wall_s: float
    seed: int
    error: str | None = None

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "problem": self.problem,
                "engine": self.engine,
                "params": self.params,
                "found": self.found,
                "program": self.program,
                "evaluations": self.evaluations,
                "wall_s": round(self.wall_s, 4),
                "seed": self.seed,
                "error": self.error,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def derive_seed(problem_id: str, engine_id: str, global_seed: int) -> int:
    return fnv1a_64(f"{problem_id}|{engine_id}|{global_seed}".encode("utf-8")) & (2**63 - 1)


def _make_fitness(params: dict, problem: Problem, registry: Registry):
    name = params.get("fitness", "oracle-cf")
    if name == "uniform":
        return UniformFitness()
    if name == "model":
        cmd = params.get("model_cmd")
        if not cmd:
            raise BenchError("fitness 'model' requires model_cmd")
        return ExternalModelClient(cmd)
    metric = {"oracle-cf": Metric.CF, "oracle-lcs": Metric.LCS, "oracle-fp": Metric.FP}.get(name)
    if metric is None:
        raise BenchError(f"unknown fitness {name!r}")
    return OracleFitness(list(problem.target), len(registry), metric, LcsMode.SUBSTRING)


def run_one(
    problem: Problem,
    engine: EngineSpec,
    budget_s: float,
    global_seed: int,
    registry: Registry,
) -> BenchRow:
    seed = derive_seed(problem.id, engine.id, global_seed)
    params = engine.params
    length = int(params.get("length", problem.length))
    try:
        if engine.engine == "planted":
            # Harness sanity engine: answers with the hidden target directly.
            program = eliminate_dead_code(list(problem.target), registry)
            report = SynthesisReport(
                engine="planted",
                found=True,
                program=program,
                program_text=registry.format_program(program),
                generations=0,
                evaluations=0,
                seed=seed,
            )
        elif engine.engine == "ga":
            config = GaConfig(
                length=length,
                population=int(params.get("pop", 100)),
                elite_fraction=float(params.get("elite", 0.20)),
                crossover_share=float(params.get("crossover_share", 0.70)),
                top_n=int(params.get("top_n", 3)),
                window=int(params.get("window", 5)),
                max_generations=params.get("max_generations"),
                time_budget_s=budget_s,
                seed=seed,
                ns_mode=NsMode(params.get("ns_mode", "bfs")),
            )
            model = _make_fitness(params, problem, registry)
            try:
                report = synthesize_ga(problem.spec, config, model, registry)
            finally:
                if isinstance(model, ExternalModelClient):
                    model.close()
        elif engine.engine == "cma":
            pmap = tuple(params["pmap"]) if "pmap" in params else None
            scheme = MappingScheme(
                SchemeKind(params.get("scheme", "bin")),
                length,
                len(registry),
                pmap if params.get("bin_mode", "equal") == "prop" else None,
            )
            report = synthesize_cma(
                problem.spec,
                scheme,
                RestartPolicy.parse(params.get("restart", "none")),
                registry,
                seed=seed,
                time_budget_s=budget_s,
                max_evaluations=params.get("max_evaluations"),
                sigma=float(params.get("sigma", 1.0)),
                popsize=params.get("popsize"),
            )
        else:
            raise BenchError(f"unknown engine kind {engine.engine!r}")
    except Exception as e:  # noqa: BLE001 - individual failures become rows
        return BenchRow(
            problem=problem.id,
            engine=engine.id,
            params=params,
            found=False,
            program=None,
            evaluations=0,
            wall_s=0.0,
            seed=seed,
            error=f"{type(e).__name__}: {e}",
        )
    return BenchRow(
        problem=problem.id,
        engine=engine.id,
        params=params,
        found=report.found,
        program=report.program,
        evaluations=report.evaluations,
        wall_s=report.wall_s,
        seed=seed,
    )


def _run_one_remote(args) -> BenchRow:
    problem, engine, budget_s, global_seed, registry_path = args
    registry = Registry.load(registry_path) if registry_path else Registry.default()
    return run_one(problem, engine, budget_s, global_seed, registry)


def run_benchmark(
    problems: Sequence[Problem],
    engines: Sequence[EngineSpec],
    budget_s: float,
    global_seed: int,
    registry: Registry,
    jobs: int = 1,
    registry_path: str | None = None,
    row_sink: Callable[[BenchRow], None] | None = None,
) -> list[BenchRow]:
    """Cartesian product of problems and engines; rows stream as runs finish."""
    if not problems or not engines:
        raise BenchError("need at least one problem and one engine")
    tasks = [(p, e) for p in problems for e in engines]
    rows: list[BenchRow] = []
    if jobs <= 1:
        for p, e in tasks:
            row = run_one(p, e, budget_s, global_seed, registry)
            rows.append(row)
            if row_sink:
                row_sink(row)
        return rows
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_run_one_remote, (p, e, budget_s, global_seed, registry_path))
            for p, e in tasks
        ]
        for fut in as_completed(futures):
            row = fut.result()
            rows.append(row)
            if row_sink:
                row_sink(row)
    return rows


@dataclass(frozen=True)
class EngineSummary:
    engine: str
    rate: float
    median_s: float
    mean_evals: float


def aggregate(
    rows: Sequence[BenchRow], problems: Sequence[Problem], registry: Registry
) -> list[EngineSummary]:
    """Per-engine synthesis rate, median wall time, mean evaluations.

    Every found row is re-verified against its problem's spec; a claimed
    solution that fails verification is a harness bug worth crashing on.
    """
    by_id = {p.id: p for p in problems}
    for row in rows:
        if row.found:
            problem = by_id.get(row.problem)
            if problem is None:
                raise BenchError(f"row references unknown problem {row.problem!r}")
            if row.program is None or not satisfies(row.program, problem.spec, registry):
                raise BenchError(
                    f"row {row.problem}/{row.engine} claims a solution that fails its spec"
                )
    summaries = []
    for engine_id in sorted({r.engine for r in rows}):
        batch = [r for r in rows if r.engine == engine_id]
        summaries.append(
            EngineSummary(
                engine=engine_id,
                rate=sum(r.found for r in batch) / len(batch),
                median_s=median(r.wall_s for r in batch),
                mean_evals=fmean(r.evaluations for r in batch),
            )
        )
    return summaries


def summaries_to_csv(summaries: Sequence[EngineSummary]) -> str:
    lines = ["engine,rate,median_s,mean_evals"]
    for s in summaries:
        lines.append(f"{s.engine},{s.rate:.4f},{s.median_s:.3f},{s.mean_evals:.1f}")
    return "\n".join(lines) + "\n"
