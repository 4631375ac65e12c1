"""Synthesis of list-manipulation programs from input-output examples.

Two engines search the same token-program space: a genetic algorithm ranked
by pluggable fitness models, and CMA-ES over continuous vectors decoded
through token mapping schemes. A benchmark harness and a training-data
generator round out the toolkit.
"""

from .interpreter import (
    eliminate_dead_code,
    equivalent,
    evaluate,
    random_program,
    satisfies,
)
from .iospec import Spec
from .registry import Registry

__version__ = "0.1.0"

__all__ = [
    "Registry",
    "Spec",
    "evaluate",
    "eliminate_dead_code",
    "equivalent",
    "satisfies",
    "random_program",
    "__version__",
]
