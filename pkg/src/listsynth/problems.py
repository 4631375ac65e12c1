"""Benchmark problem generation: hidden targets with their io specs."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .interpreter import GenerationError, Program, evaluate, random_program
from .iospec import Spec
from .registry import Registry
from .traindata import random_input
from .values import value_from_json


@dataclass(frozen=True)
class Problem:
    id: str
    length: int
    target: tuple[int, ...]
    spec: Spec


def generate_problems(
    n: int,
    length: int,
    examples: int,
    rng: random.Random,
    registry: Registry,
    max_attempts: int = 1000,
) -> list[Problem]:
    """n problems, deterministic per seed; constant-output specs are rejected."""
    if n < 1 or examples < 1:
        raise ValueError("n and examples must be >= 1")
    problems = []
    for idx in range(n):
        for _ in range(max_attempts):
            target = random_program(length, rng, registry)
            inputs = [random_input(rng) for _ in range(examples)]
            outputs = [evaluate(target, i, registry)[0] for i in inputs]
            if all(o == outputs[0] for o in outputs) and examples > 1:
                continue  # degenerate: every example maps to one constant
            problems.append(
                Problem(
                    id=f"p{idx:04d}",
                    length=length,
                    target=tuple(target),
                    spec=Spec.from_pairs(zip(inputs, outputs)),
                )
            )
            break
        else:
            raise GenerationError(f"could not generate a non-degenerate problem {idx}")
    return problems


def save_problems(problems, path, registry: Registry) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in problems:
            obj = {
                "id": p.id,
                "length": p.length,
                "target": list(p.target),
                "target_text": registry.format_program(list(p.target)),
                "io": [{"in": i, "out": o} for i, o in p.spec.examples],
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def load_problems(path) -> list[Problem]:
    problems = []
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        spec = Spec.from_pairs(
            [(value_from_json(p["in"]), value_from_json(p["out"])) for p in obj["io"]]
        )
        problems.append(
            Problem(
                id=str(obj["id"]),
                length=int(obj["length"]),
                target=tuple(int(t) for t in obj["target"]),
                spec=spec,
            )
        )
    return problems
