"""The token registry: the instruction set candidate programs are built from.

A token is a base operation plus an optional bound parameter, e.g. `MAP(*2)`
or `FILTER(>0)`. `TAKE`/`DROP`/`ACCESS` exist in two forms: the bare form
reads its count/index from dataflow (an INT argument slot), the literal form
`DROP(2)` binds it in the token itself. A registry is an ordered, immutable
set of tokens with dense ids; everything downstream addresses tokens by id.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .hashing import fnv1a_64
from .values import INT, LIST


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class TokenSpec:
    id: int
    name: str
    arg_types: tuple[str, ...]
    ret_type: str
    base: str
    param: str | None

    @property
    def arity(self) -> int:
        return len(self.arg_types)


_MAP_PARAMS = ("+1", "-1", "*2", "*3", "*4", "/2", "/3", "/4", "*(-1)", "**2")
_PRED_PARAMS = (">0", "<0", "even", "odd")
_BINOP_PARAMS = ("+", "-", "*", "min", "max")

# base -> (allowed params or None, arg types of the bare form, return type)
_SIGNATURES: dict[str, tuple[tuple[str, ...] | None, tuple[str, ...], str]] = {
    "HEAD": (None, (LIST,), INT),
    "LAST": (None, (LIST,), INT),
    "TAKE": (None, (INT, LIST), LIST),
    "DROP": (None, (INT, LIST), LIST),
    "ACCESS": (None, (INT, LIST), INT),
    "MINIMUM": (None, (LIST,), INT),
    "MAXIMUM": (None, (LIST,), INT),
    "REVERSE": (None, (LIST,), LIST),
    "SORT": (None, (LIST,), LIST),
    "SUM": (None, (LIST,), INT),
    "MAP": (_MAP_PARAMS, (LIST,), LIST),
    "FILTER": (_PRED_PARAMS, (LIST,), LIST),
    "COUNT": (_PRED_PARAMS, (LIST,), INT),
    "ZIPWITH": (_BINOP_PARAMS, (LIST, LIST), LIST),
    "SCANL1": (_BINOP_PARAMS, (LIST,), LIST),
}

# Bare integer-argument ops may instead bind the integer as a literal,
# e.g. DROP(2): the INT slot disappears from the signature.
_LITERAL_INT_BASES = ("TAKE", "DROP", "ACCESS")


def _spec_from_name(token_id: int, name: str) -> TokenSpec:
    base, param = name, None
    if "(" in name:
        if not name.endswith(")"):
            raise RegistryError(f"malformed token name: {name!r}")
        base, param = name[: name.index("(")], name[name.index("(") + 1 : -1]
    if base not in _SIGNATURES:
        raise RegistryError(f"unknown operation: {name!r}")
    allowed, arg_types, ret_type = _SIGNATURES[base]
    if param is None:
        if allowed is not None:
            raise RegistryError(f"{base} requires a parameter: {name!r}")
    elif base in _LITERAL_INT_BASES:
        try:
            int(param)
        except ValueError:
            raise RegistryError(f"{base} literal must be an integer: {name!r}") from None
        arg_types = (LIST,)
    elif allowed is None or param not in allowed:
        raise RegistryError(f"unsupported parameter for {base}: {name!r}")
    return TokenSpec(token_id, name, arg_types, ret_type, base, param)


class Registry:
    """Immutable token table with dense ids 0..n-1."""

    def __init__(self, tokens: list[TokenSpec]):
        if not tokens:
            raise RegistryError("empty registry")
        for i, tok in enumerate(tokens):
            if tok.id != i:
                raise RegistryError(f"token ids must be dense, got {tok.id} at {i}")
        names = [t.name for t in tokens]
        if len(set(names)) != len(names):
            raise RegistryError("duplicate token names")
        self._tokens = tuple(tokens)
        self._by_name = {t.name: t.id for t in tokens}

    @classmethod
    def from_names(cls, names: list[str]) -> "Registry":
        return cls([_spec_from_name(i, name) for i, name in enumerate(names)])

    @classmethod
    def default(cls) -> "Registry":
        names = [
            "HEAD", "LAST", "TAKE", "DROP", "ACCESS",
            "MINIMUM", "MAXIMUM", "REVERSE", "SORT", "SUM",
        ]
        names += [f"MAP({p})" for p in _MAP_PARAMS]
        names += [f"FILTER({p})" for p in _PRED_PARAMS]
        names += [f"COUNT({p})" for p in _PRED_PARAMS]
        names += [f"ZIPWITH({p})" for p in _BINOP_PARAMS]
        names += [f"SCANL1({p})" for p in _BINOP_PARAMS]
        return cls.from_names(names)

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self):
        return iter(self._tokens)

    def token(self, token_id: int) -> TokenSpec:
        if not 0 <= token_id < len(self._tokens):
            raise RegistryError(f"token id out of range: {token_id}")
        return self._tokens[token_id]

    def id_of(self, name: str) -> int:
        if name not in self._by_name:
            raise RegistryError(f"unknown token name: {name!r}")
        return self._by_name[name]

    def subset(self, n: int) -> "Registry":
        """The first n tokens as their own registry (ids unchanged)."""
        if not 1 <= n <= len(self._tokens):
            raise RegistryError(f"bad subset size: {n}")
        return Registry(list(self._tokens[:n]))

    def extended(self, names: list[str]) -> "Registry":
        """A new registry with extra tokens appended after the current ones."""
        base = len(self._tokens)
        extra = [_spec_from_name(base + i, name) for i, name in enumerate(names)]
        return Registry(list(self._tokens) + extra)

    # -- program literals --------------------------------------------------

    def parse_program(self, text: str) -> list[int]:
        """Parse `FILTER(>0),MAP(*2),SORT,REVERSE` into token ids."""
        parts, depth, cur = [], 0, ""
        for ch in text:
            if ch == "," and depth == 0:
                parts.append(cur)
                cur = ""
                continue
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            cur += ch
        parts.append(cur)
        ids = [self.id_of(p.strip()) for p in parts if p.strip()]
        if not ids:
            raise RegistryError(f"empty program literal: {text!r}")
        return ids

    def format_program(self, tokens: list[int]) -> str:
        return ",".join(self.token(t).name for t in tokens)

    # -- persistence -------------------------------------------------------

    def canonical_bytes(self) -> bytes:
        lines = [
            f"{t.id}\t{t.name}\t{','.join(t.arg_types)}\t{t.ret_type}\n"
            for t in self._tokens
        ]
        return "".join(lines).encode("utf-8")

    @property
    def fingerprint(self) -> int:
        """64-bit FNV-1a of the canonical registry file bytes."""
        return fnv1a_64(self.canonical_bytes())

    def save(self, path) -> None:
        Path(path).write_bytes(self.canonical_bytes())

    @classmethod
    def load(cls, path) -> "Registry":
        tokens = []
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines()):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise RegistryError(f"line {lineno + 1}: expected 4 tab-separated fields")
            tid, name, arg_types, ret_type = fields
            spec = _spec_from_name(int(tid), name)
            if ",".join(spec.arg_types) != arg_types or spec.ret_type != ret_type:
                raise RegistryError(
                    f"line {lineno + 1}: declared signature {arg_types}->{ret_type} "
                    f"does not match {name!r}"
                )
            tokens.append(spec)
        return cls(tokens)
