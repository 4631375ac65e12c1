"""Command-line surface: `synth` (ga/cma), `gen` (problems/traindata/registry), `bench`."""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click

from .bench import (
    BenchRow,
    aggregate,
    load_engines,
    run_benchmark,
    summaries_to_csv,
)
from .cma import RestartPolicy, synthesize_cma
from .ga import GaConfig, NsMode, synthesize_ga
from .iospec import Spec
from .mapping import MappingScheme, SchemeKind
from .metrics import LcsMode, Metric, frequency_pmap
from .models import ExternalModelClient, OracleFitness, UniformFitness
from .problems import generate_problems, load_problems, save_problems
from .registry import Registry
from .report import SynthesisReport
from .traindata import generate_training_data, write_jsonl


def _load_registry(path: str | None) -> Registry:
    return Registry.load(path) if path else Registry.default()


def _write_report(report: SynthesisReport, path: str) -> None:
    Path(path).write_bytes(report.to_json_bytes())
    status = report.program_text if report.found else "not found"
    click.echo(
        f"{report.engine}: {status} | generations={report.generations} "
        f"evaluations={report.evaluations} wall={report.wall_s:.2f}s",
        err=True,
    )


@click.group()
def synth():
    """Synthesize a program for an input-output spec file."""


@synth.command("ga")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--length", type=int, required=True, help="Program length to search at.")
@click.option("--pop", type=int, default=100, show_default=True)
@click.option("--elite", type=float, default=0.20, show_default=True)
@click.option("--crossover-share", type=float, default=0.70, show_default=True)
@click.option("--top-n", type=int, default=3, show_default=True)
@click.option("--window", type=int, default=5, show_default=True)
@click.option(
    "--fitness",
    type=click.Choice(["oracle-cf", "oracle-lcs", "oracle-fp", "model", "uniform"]),
    default="oracle-cf",
    show_default=True,
)
@click.option("--target", "target_text", default=None,
              help="Target program literal; required for oracle fitness.")
@click.option("--model-cmd", default=None, help="Sidecar command for --fitness model.")
@click.option("--ns-mode", type=click.Choice(["bfs", "dfs"]), default="bfs", show_default=True)
@click.option("--max-gens", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget-s", type=float, required=True)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
def synth_ga(
    spec_path, length, pop, elite, crossover_share, top_n, window, fitness,
    target_text, model_cmd, ns_mode, max_gens, seed, budget_s, report_path, registry_path,
):
    """Genetic search with a pluggable fitness model."""
    registry = _load_registry(registry_path)
    spec = Spec.load(spec_path)
    config = GaConfig(
        length=length,
        population=pop,
        elite_fraction=elite,
        crossover_share=crossover_share,
        top_n=top_n,
        window=window,
        max_generations=max_gens,
        time_budget_s=budget_s,
        seed=seed,
        ns_mode=NsMode(ns_mode),
    )
    model = None
    try:
        if fitness == "uniform":
            model = UniformFitness()
        elif fitness == "model":
            if not model_cmd:
                raise click.UsageError("--fitness model requires --model-cmd")
            model = ExternalModelClient(model_cmd)
        else:
            if not target_text:
                raise click.UsageError(f"--fitness {fitness} requires --target")
            metric = {"oracle-cf": Metric.CF, "oracle-lcs": Metric.LCS, "oracle-fp": Metric.FP}
            model = OracleFitness(
                registry.parse_program(target_text), len(registry), metric[fitness], LcsMode.SUBSTRING
            )
        report = synthesize_ga(spec, config, model, registry)
    finally:
        if isinstance(model, ExternalModelClient):
            model.close()
    _write_report(report, report_path)
    sys.exit(0 if report.found else 2)


@synth.command("cma")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--length", type=int, required=True)
@click.option(
    "--scheme",
    type=click.Choice([k.value for k in SchemeKind]),
    default="bin",
    show_default=True,
)
@click.option("--bin-mode", type=click.Choice(["equal", "prop"]), default="equal", show_default=True)
@click.option("--pmap-file", default=None, type=click.Path(exists=True),
              help="JSON array of per-token probabilities for --bin-mode prop.")
@click.option("--restart", default="none", show_default=True,
              help="none, ipop, or any +-combination of pb/mb/cb.")
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--popsize", type=int, default=None)
@click.option("--max-evals", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget-s", type=float, required=True)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
def synth_cma(
    spec_path, length, scheme, bin_mode, pmap_file, restart, sigma, popsize,
    max_evals, seed, budget_s, report_path, registry_path,
):
    """Continuous optimization over a token mapping scheme."""
    registry = _load_registry(registry_path)
    spec = Spec.load(spec_path)
    kind = SchemeKind(scheme)
    pmap = None
    if bin_mode == "prop":
        if kind not in (SchemeKind.BIN, SchemeKind.DYN_BIN):
            raise click.UsageError("--bin-mode prop only applies to bin schemes")
        if pmap_file:
            pmap = tuple(float(p) for p in json.loads(Path(pmap_file).read_text("utf-8")))
        else:
            # No model available: fall back to token frequencies over a random corpus.
            pmap = tuple(frequency_pmap(registry, length, random.Random(seed)))
    mapping = MappingScheme(kind, length, len(registry), pmap)
    report = synthesize_cma(
        spec,
        mapping,
        RestartPolicy.parse(restart),
        registry,
        seed=seed,
        time_budget_s=budget_s,
        max_evaluations=max_evals,
        sigma=sigma,
        popsize=popsize,
    )
    _write_report(report, report_path)
    sys.exit(0 if report.found else 2)


@click.group()
def gen():
    """Generate benchmark problems, training data, or a registry file."""


@gen.command("problems")
@click.option("--n", type=int, required=True)
@click.option("--length", type=int, required=True)
@click.option("--examples", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
def gen_problems(n, length, examples, seed, out_path, registry_path):
    registry = _load_registry(registry_path)
    problems = generate_problems(n, length, examples, random.Random(seed), registry)
    save_problems(problems, out_path, registry)
    click.echo(f"wrote {len(problems)} problems to {out_path}", err=True)


@gen.command("traindata")
@click.option("--n", type=int, required=True)
@click.option("--length", type=int, required=True)
@click.option("--examples", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
def gen_traindata(n, length, examples, seed, out_path, registry_path):
    registry = _load_registry(registry_path)
    records = generate_training_data(n, length, examples, random.Random(seed), registry)
    write_jsonl(
        records,
        out_path,
        registry,
        meta={"n": n, "length": length, "examples": examples, "seed": seed,
              "sigma_size": len(registry)},
    )
    click.echo(f"wrote {len(records)} records to {out_path}", err=True)


@gen.command("registry")
@click.option("--out", "out_path", required=True, type=click.Path())
def gen_registry(out_path):
    """Write the built-in default registry as a TSV file."""
    registry = Registry.default()
    registry.save(out_path)
    click.echo(f"wrote {len(registry)} tokens, fnv1a={registry.fingerprint:016x}", err=True)


@click.command()
@click.option("--problems", "problems_path", required=True, type=click.Path(exists=True))
@click.option("--engines", "engines_path", required=True, type=click.Path(exists=True))
@click.option("--budget-s", type=float, required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Row stream destination (JSON lines).")
@click.option("--csv", "csv_path", default=None, type=click.Path(),
              help="Also write the aggregate CSV here.")
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
def bench(problems_path, engines_path, budget_s, jobs, seed, out_path, csv_path, registry_path):
    """Run every engine on every problem and aggregate synthesis rates."""
    registry = _load_registry(registry_path)
    problems = load_problems(problems_path)
    engines = load_engines(engines_path)
    with Path(out_path).open("w", encoding="utf-8") as fh:

        def sink(row: BenchRow) -> None:
            fh.write(row.to_json_line() + "\n")
            fh.flush()

        rows = run_benchmark(
            problems,
            engines,
            budget_s,
            seed,
            registry,
            jobs=jobs,
            registry_path=registry_path,
            row_sink=sink,
        )
    csv_text = summaries_to_csv(aggregate(rows, problems, registry))
    click.echo(csv_text, nl=False)
    if csv_path:
        Path(csv_path).write_text(csv_text, "utf-8")
