import json
import random

import pytest

from listsynth.interpreter import evaluate
from listsynth.metrics import LcsMode, fitness_cf, fitness_lcs
from listsynth.traindata import (
    TrainingRecord,
    generate_training_data,
    random_input,
    read_jsonl,
    write_jsonl,
)


def test_random_input_bounds(rng):
    for _ in range(200):
        xs = random_input(rng)
        assert 1 <= len(xs) <= 20
        assert all(-255 <= x <= 255 for x in xs)


def test_deterministic_per_seed(registry):
    a = generate_training_data(3, 4, 5, random.Random(8), registry)
    b = generate_training_data(3, 4, 5, random.Random(8), registry)
    assert [r.to_json_line() for r in a] == [r.to_json_line() for r in b]


def test_labels_consistent(registry, rng):
    for rec in generate_training_data(30, 4, 3, rng, registry):
        assert rec.cf == fitness_cf(rec.candidate, rec.target)
        assert rec.lcs_subseq == fitness_lcs(rec.candidate, rec.target, LcsMode.SUBSEQUENCE)
        assert rec.lcs_substr == fitness_lcs(rec.candidate, rec.target, LcsMode.SUBSTRING)
        assert len(rec.membership) == len(registry)
        assert all(rec.membership[t] == 1 for t in rec.target)
        assert sum(rec.membership) == len(set(rec.target))


def test_traces_reproduce_bit_for_bit(registry, rng):
    for rec in generate_training_data(20, 3, 4, rng, registry):
        assert len(rec.traces) == len(rec.examples)
        for (inp, out), trace in zip(rec.examples, rec.traces):
            assert evaluate(rec.target, inp, registry)[0] == out
            assert evaluate(rec.candidate, inp, registry)[1] == trace


def test_mean_cf_not_degenerate(registry):
    records = generate_training_data(1000, 4, 1, random.Random(13), registry)
    mean_cf = sum(r.cf for r in records) / len(records)
    assert 0.0 < mean_cf < 4.0


def test_jsonl_round_trip(tmp_path, registry, rng):
    records = generate_training_data(5, 3, 2, rng, registry)
    path = tmp_path / "data.jsonl"
    write_jsonl(records, path, registry, meta={"seed": 1})
    loaded = read_jsonl(path)
    assert [r.to_json_line() for r in loaded] == [r.to_json_line() for r in records]
    meta = json.loads((tmp_path / "data.jsonl.meta.json").read_text("utf-8"))
    assert meta["registry_fnv1a"] == f"{registry.fingerprint:016x}"
    assert meta["records"] == 5 and meta["seed"] == 1


def test_jsonl_contract_keys(registry, rng):
    rec = generate_training_data(1, 2, 2, rng, registry)[0]
    obj = json.loads(rec.to_json_line())
    assert set(obj) == {"target", "candidate", "io", "traces", "labels"}
    assert set(obj["labels"]) == {"cf", "lcs_subseq", "lcs_substr", "membership"}
    assert all(set(p) == {"in", "out"} for p in obj["io"])
    assert len(obj["traces"]) == 2
    assert all(len(t) == 2 for t in obj["traces"])  # one step per token


def test_validation():
    with pytest.raises(ValueError):
        generate_training_data(0, 2, 2, random.Random(0), None)
    with pytest.raises(ValueError):
        generate_training_data(1, 2, 0, random.Random(0), None)


def test_record_spec_view(registry, rng):
    rec = generate_training_data(1, 2, 3, rng, registry)[0]
    spec = rec.spec()
    assert len(spec) == 3
    assert spec.examples[0] == rec.examples[0]


def test_from_json_line_types(registry, rng):
    rec = generate_training_data(1, 2, 2, rng, registry)[0]
    parsed = TrainingRecord.from_json_line(rec.to_json_line())
    assert parsed.target == rec.target and parsed.traces == rec.traces
