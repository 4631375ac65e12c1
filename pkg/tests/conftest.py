import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("repo")

from listsynth.registry import Registry


@pytest.fixture(scope="session")
def registry():
    return Registry.default()


@pytest.fixture(scope="session")
def worked_registry(registry):
    # Default roster plus the literal-count drop used by the worked trace example.
    return registry.extended(["DROP(2)"])


@pytest.fixture(scope="session")
def table1_program(registry):
    return registry.parse_program("FILTER(>0),MAP(*2),SORT,REVERSE")


@pytest.fixture(scope="session")
def worked_pair(worked_registry):
    """(candidate, target) of the worked fitness example."""
    target = worked_registry.parse_program("FILTER(>0),MAP(*2),SORT,REVERSE")
    candidate = worked_registry.parse_program("FILTER(>0),MAP(*2),REVERSE,DROP(2)")
    return candidate, target


@pytest.fixture()
def rng():
    return random.Random(0xC0FFEE)
