"""Total evaluation of token programs with per-statement traces.

A program is a sequence of token ids. Statements communicate by type-directed
dataflow rather than named variables: each argument slot of type t binds the
output of the nearest earlier statement returning t, falling back to the
program input when it has type t, and to a default (0 / empty list) when
nothing of type t exists. When a statement has two slots of the same type,
the second binds the next-nearest distinct producer and reuses the first
binding if there is no second producer (so e.g. a lone ZIPWITH zips a list
with itself). Every operation is total, so any id sequence evaluates without
error: out-of-range reads yield 0, counts are clamped, zips truncate, and
all arithmetic saturates at the 32-bit boundaries.
"""

from __future__ import annotations

import random
from typing import Sequence

from .iospec import Spec
from .registry import Registry, TokenSpec
from .values import LIST, Value, clamp, default_value, value_type

Program = list[int]

# Binding sentinels: non-negative bindings are statement indices.
FROM_INPUT = -1
FROM_DEFAULT = -2


class GenerationError(RuntimeError):
    """Random program generation exhausted its retry budget."""


def statement_bindings(
    tokens: Sequence[int], registry: Registry, input_type: str
) -> list[tuple[int, ...]]:
    """Resolve every argument slot to a statement index, FROM_INPUT or FROM_DEFAULT."""
    ret_types = [registry.token(t).ret_type for t in tokens]
    out: list[tuple[int, ...]] = []
    for i, tid in enumerate(tokens):
        tok = registry.token(tid)
        binds: list[int] = []
        for slot, t in enumerate(tok.arg_types):
            earlier = [b for s, b in enumerate(binds) if tok.arg_types[s] == t]
            choice = None
            for j in range(i - 1, -1, -1):
                if ret_types[j] == t and j not in earlier:
                    choice = j
                    break
            if choice is None and input_type == t and FROM_INPUT not in earlier:
                choice = FROM_INPUT
            if choice is None:
                choice = earlier[0] if earlier else FROM_DEFAULT
            binds.append(choice)
        out.append(tuple(binds))
    return out


def _trunc_div(a: int, b: int) -> int:
    # b is a positive literal; truncate toward zero.
    return -((-a) // b) if a < 0 else a // b


_UNARY_INT = {
    "+1": lambda x: x + 1,
    "-1": lambda x: x - 1,
    "*2": lambda x: x * 2,
    "*3": lambda x: x * 3,
    "*4": lambda x: x * 4,
    "/2": lambda x: _trunc_div(x, 2),
    "/3": lambda x: _trunc_div(x, 3),
    "/4": lambda x: _trunc_div(x, 4),
    "*(-1)": lambda x: -x,
    "**2": lambda x: x * x,
}

_PREDICATES = {
    ">0": lambda x: x > 0,
    "<0": lambda x: x < 0,
    "even": lambda x: x % 2 == 0,
    "odd": lambda x: x % 2 != 0,
}

_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "min": min,
    "max": max,
}


def _clip_index(n: int, length: int) -> int:
    return max(0, min(length, n))


def apply_token(tok: TokenSpec, args: list[Value]) -> Value:
    base, param = tok.base, tok.param
    if base == "HEAD":
        xs = args[0]
        return xs[0] if xs else 0
    if base == "LAST":
        xs = args[0]
        return xs[-1] if xs else 0
    if base == "TAKE":
        n, xs = (int(param), args[0]) if param is not None else (args[0], args[1])
        return xs[: _clip_index(n, len(xs))]
    if base == "DROP":
        n, xs = (int(param), args[0]) if param is not None else (args[0], args[1])
        return xs[_clip_index(n, len(xs)) :]
    if base == "ACCESS":
        n, xs = (int(param), args[0]) if param is not None else (args[0], args[1])
        return xs[n] if 0 <= n < len(xs) else 0
    if base == "MINIMUM":
        xs = args[0]
        return min(xs) if xs else 0
    if base == "MAXIMUM":
        xs = args[0]
        return max(xs) if xs else 0
    if base == "REVERSE":
        return args[0][::-1]
    if base == "SORT":
        return sorted(args[0])
    if base == "SUM":
        return clamp(sum(args[0]))
    if base == "MAP":
        f = _UNARY_INT[param]
        return [clamp(f(x)) for x in args[0]]
    if base == "FILTER":
        p = _PREDICATES[param]
        return [x for x in args[0] if p(x)]
    if base == "COUNT":
        p = _PREDICATES[param]
        return sum(1 for x in args[0] if p(x))
    if base == "ZIPWITH":
        g = _BINOPS[param]
        return [clamp(g(a, b)) for a, b in zip(args[0], args[1])]
    if base == "SCANL1":
        g = _BINOPS[param]
        out: list[int] = []
        for x in args[0]:
            out.append(x if not out else clamp(g(out[-1], x)))
        return out
    raise AssertionError(f"unhandled operation {base}")


def evaluate(
    tokens: Sequence[int], value: Value, registry: Registry
) -> tuple[Value, list[Value]]:
    """Run a program on one input; returns (final output, per-statement trace)."""
    if not tokens:
        raise ValueError("empty program")
    bindings = statement_bindings(tokens, registry, value_type(value))
    trace: list[Value] = []
    for i, tid in enumerate(tokens):
        tok = registry.token(tid)
        args = []
        for slot, b in enumerate(bindings[i]):
            if b == FROM_INPUT:
                args.append(value)
            elif b == FROM_DEFAULT:
                args.append(default_value(tok.arg_types[slot]))
            else:
                args.append(trace[b])
        trace.append(apply_token(tok, args))
    return trace[-1], trace


def eliminate_dead_code(tokens: Sequence[int], registry: Registry) -> Program:
    """Keep only statements the final output depends on.

    Statement-to-statement bindings never depend on the input's type (the
    backward scan visits statements before the input), so liveness is a
    property of the program alone and the result is observationally
    equivalent to the original on every input.
    """
    if not tokens:
        raise ValueError("empty program")
    bindings = statement_bindings(tokens, registry, LIST)
    live = {len(tokens) - 1}
    stack = [len(tokens) - 1]
    while stack:
        for b in bindings[stack.pop()]:
            if b >= 0 and b not in live:
                live.add(b)
                stack.append(b)
    return [tokens[i] for i in sorted(live)]


def effective_length(tokens: Sequence[int], registry: Registry) -> int:
    return len(eliminate_dead_code(tokens, registry))


def satisfies(tokens: Sequence[int], spec: Spec, registry: Registry) -> bool:
    """True iff the program maps every example input to its expected output."""
    return all(evaluate(tokens, i, registry)[0] == o for i, o in spec.examples)


def equivalent(pa: Sequence[int], pb: Sequence[int], spec: Spec, registry: Registry) -> bool:
    """Both programs produce the expected output on every example input."""
    return satisfies(pa, spec, registry) and satisfies(pb, spec, registry)


MAX_PROGRAM_LENGTH = 16


def random_program(
    length: int,
    rng: random.Random,
    registry: Registry,
    max_attempts: int = 1000,
) -> Program:
    """Uniform random token ids, retried until nothing in the program is dead."""
    if not 1 <= length <= MAX_PROGRAM_LENGTH:
        raise ValueError(f"length must be in [1, {MAX_PROGRAM_LENGTH}]: {length}")
    n = len(registry)
    for _ in range(max_attempts):
        tokens = [rng.randrange(n) for _ in range(length)]
        if len(eliminate_dead_code(tokens, registry)) == length:
            return tokens
    raise GenerationError(
        f"no dead-code-free program of length {length} found in {max_attempts} attempts"
    )
