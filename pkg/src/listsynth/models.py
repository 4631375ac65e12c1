"""Fitness models: the scoring interface the genetic search ranks genes with.

Three realizations: an oracle that grades against a known target (benchmark
mode), a uniform scorer (ablation baseline), and a client for an external
model process speaking newline-delimited JSON over its standard streams.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from typing import Protocol, Sequence

from .iospec import Spec
from .metrics import LcsMode, Metric, fitness_cf, fitness_fp, fitness_lcs, membership_pmap


class ModelUnavailableError(RuntimeError):
    """The external fitness model failed; runs abort rather than fall back."""


class FitnessModel(Protocol):
    def score(
        self,
        spec: Spec,
        candidates: Sequence[Sequence[int]],
        traces: Sequence[Sequence[list]],
    ) -> list[float]:
        """One fitness value per candidate; traces[i][j] is candidate i's trace on example j."""
        ...

    def pmap(self, spec: Spec) -> list[float] | None:
        """Per-token membership probabilities, when this model can provide them."""
        ...


class OracleFitness:
    """Grades candidates against the known target program."""

    def __init__(
        self,
        target: Sequence[int],
        registry_size: int,
        metric: Metric = Metric.CF,
        lcs_mode: LcsMode = LcsMode.SUBSTRING,
    ):
        self.target = list(target)
        self.registry_size = registry_size
        self.metric = metric
        self.lcs_mode = lcs_mode
        self._indicator = membership_pmap(self.target, registry_size)

    def score(self, spec, candidates, traces) -> list[float]:
        if self.metric is Metric.CF:
            return [float(fitness_cf(c, self.target)) for c in candidates]
        if self.metric is Metric.LCS:
            return [float(fitness_lcs(c, self.target, self.lcs_mode)) for c in candidates]
        return [fitness_fp(c, self._indicator) for c in candidates]

    def pmap(self, spec) -> list[float] | None:
        # Only the map-based oracle exposes a probability map; the other
        # metrics leave mutation unguided.
        return list(self._indicator) if self.metric is Metric.FP else None


class UniformFitness:
    """Scores every gene identically; selection degenerates to uniform."""

    def score(self, spec, candidates, traces) -> list[float]:
        return [0.0] * len(candidates)

    def pmap(self, spec) -> list[float] | None:
        return None


class ExternalModelClient:
    """Talks to a model sidecar: one JSON request per line, one response per line.

    Requests carry the spec's io pairs plus candidate token sequences and
    their execution traces; responses echo the request id. Candidates are
    chunked so a single request never exceeds `batch_size`. Any protocol
    breakage raises ModelUnavailableError.
    """

    def __init__(self, command: str | list[str], batch_size: int = 256):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.batch_size = batch_size
        self._proc: subprocess.Popen | None = None
        self._next_id = 0

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as e:
                raise ModelUnavailableError(f"cannot start model process: {e}") from e
        return self._proc

    def _call(self, request: dict) -> dict:
        proc = self._ensure_proc()
        request["id"] = self._next_id
        self._next_id += 1
        try:
            proc.stdin.write(json.dumps(request, separators=(",", ":")) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (OSError, ValueError) as e:
            raise ModelUnavailableError(f"model process i/o failed: {e}") from e
        if not line:
            raise ModelUnavailableError("model process closed its output")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as e:
            raise ModelUnavailableError(f"malformed model response: {line!r}") from e
        if response.get("id") != request["id"]:
            raise ModelUnavailableError(
                f"response id {response.get('id')} does not match request {request['id']}"
            )
        if "error" in response:
            raise ModelUnavailableError(f"model error: {response['error']}")
        return response

    @staticmethod
    def _io_payload(spec: Spec) -> list[dict]:
        return [{"in": i, "out": o} for i, o in spec.examples]

    def score(self, spec, candidates, traces) -> list[float]:
        io = self._io_payload(spec)
        scores: list[float] = []
        for lo in range(0, len(candidates), self.batch_size):
            hi = lo + self.batch_size
            response = self._call(
                {
                    "op": "score",
                    "io": io,
                    "candidates": [list(c) for c in candidates[lo:hi]],
                    "traces": [list(t) for t in traces[lo:hi]],
                }
            )
            chunk = response.get("scores")
            if not isinstance(chunk, list) or len(chunk) != len(candidates[lo:hi]):
                raise ModelUnavailableError("score response has wrong shape")
            scores.extend(float(s) for s in chunk)
        return scores

    def pmap(self, spec) -> list[float] | None:
        response = self._call(
            {"op": "pmap", "io": self._io_payload(spec), "candidates": [], "traces": []}
        )
        pm = response.get("pmap")
        if not isinstance(pm, list):
            raise ModelUnavailableError("pmap response has wrong shape")
        # An empty map is the model's way of saying it has none to offer.
        return [float(p) for p in pm] or None

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
