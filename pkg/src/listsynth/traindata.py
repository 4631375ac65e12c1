"""Generation of labeled (target, candidate, traces) records for model training.

Each record pairs a random target program's io examples with an independent
random candidate of the same length, the candidate's execution traces on
those inputs, and the closeness labels a fitness model learns to predict.
Records stream to JSON lines; a sidecar meta file carries the registry
fingerprint so trainers can refuse mismatched data.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .interpreter import evaluate, random_program
from .iospec import Spec
from .metrics import LcsMode, fitness_cf, fitness_lcs, membership_pmap
from .registry import Registry
from .values import GEN_MAX_LEN, GEN_VAL_MAX, Value, value_from_json


def random_input(rng: random.Random) -> list[int]:
    """A random list input within the generator bounds."""
    return [rng.randint(-GEN_VAL_MAX, GEN_VAL_MAX) for _ in range(rng.randint(1, GEN_MAX_LEN))]


@dataclass
class TrainingRecord:
    target: list[int]
    candidate: list[int]
    examples: list[tuple[Value, Value]]
    traces: list[list[Value]]  # one trace per example, candidate's execution
    cf: int
    lcs_subseq: int
    lcs_substr: int
    membership: list[int]

    def spec(self) -> Spec:
        return Spec.from_pairs(self.examples)

    def to_json_line(self) -> str:
        obj = {
            "target": self.target,
            "candidate": self.candidate,
            "io": [{"in": i, "out": o} for i, o in self.examples],
            "traces": self.traces,
            "labels": {
                "cf": self.cf,
                "lcs_subseq": self.lcs_subseq,
                "lcs_substr": self.lcs_substr,
                "membership": self.membership,
            },
        }
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "TrainingRecord":
        obj = json.loads(line)
        labels = obj["labels"]
        return cls(
            target=[int(t) for t in obj["target"]],
            candidate=[int(t) for t in obj["candidate"]],
            examples=[
                (value_from_json(p["in"]), value_from_json(p["out"])) for p in obj["io"]
            ],
            traces=[[value_from_json(v) for v in tr] for tr in obj["traces"]],
            cf=int(labels["cf"]),
            lcs_subseq=int(labels["lcs_subseq"]),
            lcs_substr=int(labels["lcs_substr"]),
            membership=[int(x) for x in labels["membership"]],
        )


def generate_training_data(
    count: int,
    program_length: int,
    examples_per_program: int,
    rng: random.Random,
    registry: Registry,
) -> list[TrainingRecord]:
    """Deterministic-per-seed record stream; degenerate specs are kept as-is."""
    if count < 1 or examples_per_program < 1:
        raise ValueError("count and examples_per_program must be >= 1")
    records = []
    for _ in range(count):
        target = random_program(program_length, rng, registry)
        candidate = random_program(program_length, rng, registry)
        inputs = [random_input(rng) for _ in range(examples_per_program)]
        examples = [(i, evaluate(target, i, registry)[0]) for i in inputs]
        traces = [evaluate(candidate, i, registry)[1] for i in inputs]
        records.append(
            TrainingRecord(
                target=target,
                candidate=candidate,
                examples=examples,
                traces=traces,
                cf=fitness_cf(candidate, target),
                lcs_subseq=fitness_lcs(candidate, target, LcsMode.SUBSEQUENCE),
                lcs_substr=fitness_lcs(candidate, target, LcsMode.SUBSTRING),
                membership=[int(p) for p in membership_pmap(target, len(registry))],
            )
        )
    return records


def write_jsonl(records, path, registry: Registry, meta: dict | None = None) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json_line() + "\n")
    sidecar = {"registry_fnv1a": f"{registry.fingerprint:016x}", "records": len(records)}
    sidecar.update(meta or {})
    Path(str(path) + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", "utf-8"
    )


def read_jsonl(path) -> list[TrainingRecord]:
    out = []
    for line in Path(path).read_text("utf-8").splitlines():
        if line.strip():
            out.append(TrainingRecord.from_json_line(line))
    return out
