"""Codecs from real-valued vectors to token programs.

Five schemes trade dimensionality against expressiveness: single-group ranks
one coordinate per token and keeps the top-l (no repeats); multi-group gives
every program position its own block of per-token coordinates; the dynamic
variant splits positions into k single-group blocks with k itself decoded
from an extra coordinate; bin mapping folds each coordinate into one of |Σ|
standard-normal quantile bins (equal mass, or mass proportional to a token
probability map); dynamic bin spends one extra coordinate on the decoded
length. Decoding is pure: equal vectors always yield equal programs, with
ties broken toward lower token ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .interpreter import Program


class SchemeKind(Enum):
    SINGLE_GROUP = "single"
    MULTI_GROUP = "multi"
    DYN_MULTI_GROUP = "dyn-multi"
    BIN = "bin"
    DYN_BIN = "dyn-bin"


def _divisors(n: int) -> tuple[int, ...]:
    return tuple(d for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def _equal_boundaries(bins: int) -> np.ndarray:
    """Interior standard-normal quantiles splitting the line into equal-mass bins."""
    return norm.ppf(np.arange(1, bins) / bins)


@lru_cache(maxsize=None)
def _prop_boundaries(pmap: tuple[float, ...]) -> np.ndarray:
    mass = np.asarray(pmap, dtype=float)
    total = mass.sum()
    if total <= 0:
        raise ValueError("probability map must have positive total mass")
    cum = np.cumsum(mass / total)[:-1]
    return norm.ppf(np.clip(cum, 0.0, 1.0))


@dataclass(frozen=True)
class MappingScheme:
    kind: SchemeKind
    length: int
    sigma_size: int
    pmap: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.length < 1 or self.sigma_size < 1:
            raise ValueError("length and sigma_size must be positive")
        if self.kind is SchemeKind.SINGLE_GROUP and self.length > self.sigma_size:
            raise ValueError("single-group mapping needs length <= registry size")
        if self.pmap is not None:
            if self.kind not in (SchemeKind.BIN, SchemeKind.DYN_BIN):
                raise ValueError("probability maps only apply to bin mappings")
            if len(self.pmap) != self.sigma_size:
                raise ValueError("probability map length must equal registry size")
            _prop_boundaries(self.pmap)  # validates positive mass

    @property
    def dimension(self) -> int:
        if self.kind is SchemeKind.SINGLE_GROUP:
            return self.sigma_size
        if self.kind is SchemeKind.MULTI_GROUP:
            return self.length * self.sigma_size
        if self.kind is SchemeKind.DYN_MULTI_GROUP:
            return self.length * self.sigma_size + 1
        if self.kind is SchemeKind.BIN:
            return self.length
        return self.length + 1

    def _token_boundaries(self) -> np.ndarray:
        if self.pmap is not None:
            return _prop_boundaries(self.pmap)
        return _equal_boundaries(self.sigma_size)


def _top_ids(block: np.ndarray, count: int) -> list[int]:
    # Stable descending sort: equal coordinates resolve to the lower token id.
    return list(np.argsort(-block, kind="stable")[:count])


def decode(scheme: MappingScheme, x: np.ndarray) -> Program:
    """Map one parameter vector to a program."""
    x = np.asarray(x, dtype=float)
    if x.shape != (scheme.dimension,):
        raise ValueError(f"expected vector of dimension {scheme.dimension}, got {x.shape}")
    size, length = scheme.sigma_size, scheme.length

    if scheme.kind is SchemeKind.SINGLE_GROUP:
        return [int(i) for i in _top_ids(x, length)]

    if scheme.kind is SchemeKind.MULTI_GROUP:
        blocks = x.reshape(length, size)
        return [int(np.argmax(b)) for b in blocks]

    if scheme.kind is SchemeKind.DYN_MULTI_GROUP:
        divisors = _divisors(length)
        k = divisors[int(np.searchsorted(_equal_boundaries(len(divisors)), x[-1], side="right"))]
        per_block = length // k
        tokens: Program = []
        for i in range(k):
            block = x[i * size : (i + 1) * size]
            tokens.extend(int(t) for t in _top_ids(block, per_block))
        return tokens

    bounds = scheme._token_boundaries()
    if scheme.kind is SchemeKind.BIN:
        return [int(b) for b in np.searchsorted(bounds, x, side="right")]

    # DYN_BIN: the last coordinate picks the decoded length.
    decoded_len = 1 + int(np.searchsorted(_equal_boundaries(length), x[-1], side="right"))
    return [int(b) for b in np.searchsorted(bounds, x[:decoded_len], side="right")]
