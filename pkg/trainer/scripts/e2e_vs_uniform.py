#!/usr/bin/env python3
"""Compare GA synthesis rates: served fitness model vs the uniform baseline.

Both engines get identical problems, seeds and generation caps; only the
ranking signal differs. Generation caps (rather than wall-clock budgets)
keep the comparison about ranking quality, since scoring through the node
sidecar is orders of magnitude slower per generation than the in-process
baseline.

    python3 trainer/scripts/e2e_vs_uniform.py --artifact /tmp/artifact_cf_l3 \
        --problems 15 --length 3 --pop 40 --max-gens 10
"""

import argparse
import random
import sys
import time

from listsynth.ga import GaConfig, synthesize_ga
from listsynth.models import ExternalModelClient, UniformFitness
from listsynth.problems import generate_problems
from listsynth.registry import Registry


def run(model_factory, problems, args) -> int:
    solved = 0
    for i, problem in enumerate(problems):
        config = GaConfig(
            length=args.length,
            population=args.pop,
            seed=1000 + i,
            time_budget_s=args.budget_s,
            max_generations=args.max_gens,
        )
        model = model_factory()
        try:
            report = synthesize_ga(problem.spec, config, model, Registry.default())
        finally:
            if isinstance(model, ExternalModelClient):
                model.close()
        solved += report.found
        print(
            f"  problem {problem.id}: found={report.found} gens={report.generations} "
            f"wall={report.wall_s:.1f}s",
            file=sys.stderr,
        )
    return solved


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--artifact", required=True)
    ap.add_argument("--problems", type=int, default=15)
    ap.add_argument("--length", type=int, default=3)
    ap.add_argument("--examples", type=int, default=5)
    ap.add_argument("--pop", type=int, default=40)
    ap.add_argument("--max-gens", type=int, default=10)
    ap.add_argument("--budget-s", type=float, default=300.0)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    registry = Registry.default()
    problems = generate_problems(
        args.problems, args.length, args.examples, random.Random(args.seed), registry
    )
    serve_cmd = f"node trainer/dist/serve.js --artifact {args.artifact}"

    print(f"uniform baseline over {len(problems)} problems:", file=sys.stderr)
    t0 = time.time()
    uniform_solved = run(UniformFitness, problems, args)
    print(f"model-ranked over {len(problems)} problems:", file=sys.stderr)
    model_solved = run(lambda: ExternalModelClient(serve_cmd), problems, args)
    print(
        f"solved: model={model_solved}/{len(problems)} "
        f"uniform={uniform_solved}/{len(problems)} "
        f"(total {time.time() - t0:.0f}s)"
    )


if __name__ == "__main__":
    main()
