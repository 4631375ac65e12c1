"""Runtime values: 32-bit-saturating integers and bounded lists of them."""

from __future__ import annotations

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1
LIST_CAP = 64

# Bounds for generated benchmark/training inputs.
GEN_MAX_LEN = 20
GEN_VAL_MAX = 255

INT = "INT"
LIST = "LIST"

Value = int | list[int]


def clamp(n: int) -> int:
    """Saturate to the signed 32-bit range."""
    if n < INT_MIN:
        return INT_MIN
    if n > INT_MAX:
        return INT_MAX
    return n


def value_type(v) -> str:
    return LIST if isinstance(v, list) else INT


def default_value(type_tag: str):
    return [] if type_tag == LIST else 0


def check_value(v, list_cap: int = LIST_CAP):
    """Validate a runtime value; returns it unchanged or raises ValueError."""
    if isinstance(v, bool):
        raise ValueError("booleans are not values")
    if isinstance(v, int):
        if not INT_MIN <= v <= INT_MAX:
            raise ValueError(f"integer out of range: {v}")
        return v
    if isinstance(v, list):
        if len(v) > list_cap:
            raise ValueError(f"list longer than cap {list_cap}: {len(v)}")
        for x in v:
            if isinstance(x, bool) or not isinstance(x, int):
                raise ValueError(f"non-integer list element: {x!r}")
            if not INT_MIN <= x <= INT_MAX:
                raise ValueError(f"list element out of range: {x}")
        return v
    raise ValueError(f"not a value: {v!r}")


def parse_value(text: str):
    """Parse a value literal: a decimal integer or `[a,b,c]`."""
    s = text.strip()
    if s.startswith("[") and s.endswith("]"):
        body = s[1:-1].strip()
        if not body:
            return check_value([])
        return check_value([int(part.strip()) for part in body.split(",")])
    return check_value(int(s))


def format_value(v) -> str:
    if isinstance(v, list):
        return "[" + ",".join(str(x) for x in v) + "]"
    return str(v)


def value_from_json(obj):
    """Accept a JSON-decoded value (number or array of numbers)."""
    if isinstance(obj, list):
        return check_value([int(x) for x in obj])
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ValueError(f"not a value: {obj!r}")
    return check_value(obj)
