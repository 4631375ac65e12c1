"""Synthesis run reports.

The serialized report is deliberately deterministic for a fixed seed: wall
time is kept on the in-memory report (and surfaced on stderr by the CLI) but
never written into the JSON document, so repeated runs produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass
class SynthesisReport:
    engine: str
    found: bool
    program: list[int] | None
    program_text: str | None
    generations: int
    evaluations: int
    seed: int
    ns_invocations: int = 0
    restarts: int = 0
    wall_s: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "engine": self.engine,
            "found": self.found,
            "program": self.program,
            "program_text": self.program_text,
            "generations": self.generations,
            "evaluations": self.evaluations,
            "ns_invocations": self.ns_invocations,
            "restarts": self.restarts,
            "seed": self.seed,
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")
