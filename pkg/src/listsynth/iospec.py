"""Input-output specifications: the behavioral contract a program must meet."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .values import Value, check_value, value_from_json, value_type


@dataclass(frozen=True)
class Spec:
    """A non-empty set of (input, output) examples with uniform types."""

    examples: tuple[tuple[Value, Value], ...]

    def __post_init__(self):
        if not self.examples:
            raise ValueError("a spec needs at least one example")
        for i, o in self.examples:
            check_value(i)
            check_value(o)
        in_types = {value_type(i) for i, _ in self.examples}
        out_types = {value_type(o) for _, o in self.examples}
        if len(in_types) != 1 or len(out_types) != 1:
            raise ValueError("all examples must share input and output types")

    @classmethod
    def from_pairs(cls, pairs) -> "Spec":
        return cls(tuple((i, o) for i, o in pairs))

    @property
    def input_type(self) -> str:
        return value_type(self.examples[0][0])

    @property
    def output_type(self) -> str:
        return value_type(self.examples[0][1])

    def inputs(self):
        return [i for i, _ in self.examples]

    def __len__(self) -> int:
        return len(self.examples)

    def to_json_lines(self) -> str:
        return "".join(
            json.dumps({"in": i, "out": o}, separators=(",", ":")) + "\n"
            for i, o in self.examples
        )

    @classmethod
    def from_json_lines(cls, text: str) -> "Spec":
        pairs = []
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append((value_from_json(obj["in"]), value_from_json(obj["out"])))
        return cls.from_pairs(pairs)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json_lines(), "utf-8")

    @classmethod
    def load(cls, path) -> "Spec":
        return cls.from_json_lines(Path(path).read_text("utf-8"))
