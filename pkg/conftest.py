"""
Shared pytest fixtures.
"""

import os
import random

import pytest

from config import StrataConfig
from poset import build_poset, read_poset

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'fixtures')


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture
def rng():
    """Random source seeded from STRATAFLOW_SEED."""
    return random.Random(StrataConfig.SEED)


@pytest.fixture
def chain3():
    return build_poset(['a', 'b', 'c'], [('a', 'b'), ('b', 'c')])


@pytest.fixture
def circle4():
    return read_poset(fixture_path('circle4.poset'))


@pytest.fixture
def sphere6():
    return read_poset(fixture_path('sphere6.poset'))
