"""
Tests for beat points, cores, weak points and weak reduction.
"""

import random

import pytest

from complex import homology, order_complex
from config import StrataConfig
from poset import UnknownElement, build_poset, chain, isomorphic
from reduction import (add_top, beat_points, core, homotopy_equivalent, is_contractible,
                       is_minimal, remove_point, weak_points, weak_reduce)
from utils import random_poset


def _random(rng, max_size=StrataConfig.MAX_RANDOM_SIZE):
    elements, pairs = random_poset(rng, rng.randint(1, max_size))
    return build_poset(elements, pairs)


def test_beat_points(chain3, circle4):
    assert {'b', 'c'} <= beat_points(chain3, 'down')
    assert beat_points(circle4, 'down') == set()
    assert beat_points(circle4, 'up') == set()
    assert beat_points(chain(['a']), 'down') == set()
    with pytest.raises(ValueError):
        beat_points(chain3, 'sideways')


def test_remove_point(chain3, circle4):
    assert remove_point(chain3, 'b').covers == {('a', 'c')}
    assert len(remove_point(build_poset(['a', 'b'], []), 'a')) == 1
    assert remove_point(circle4, 'c').covers == {('a', 'd'), ('b', 'd')}
    with pytest.raises(UnknownElement):
        remove_point(chain3, 'q')


def test_core_of_cone_and_circle(circle4):
    reduced, trace = core(add_top(circle4))
    assert len(reduced) == 1
    assert trace.initial_size - len(trace.steps) == trace.final_size == 1

    same, trace = core(circle4)
    assert same == circle4
    assert trace.steps == []
    assert is_minimal(circle4)


def test_weak_points(chain3, circle4):
    assert weak_points(chain3, 'down') >= beat_points(chain3, 'down')
    assert weak_points(circle4, 'down') == set()
    assert weak_points(circle4, 'up') == set()


def test_empty_space_is_not_contractible():
    assert not is_contractible(build_poset([], []))
    # minimal elements never become weak points through their empty down-set
    assert 'a' not in weak_points(build_poset(['a', 'b'], []), 'down')


def test_weak_reduce_small_cases(circle4):
    reduced, _ = weak_reduce(add_top(circle4))
    assert len(reduced) == 1
    same, trace = weak_reduce(circle4)
    assert same == circle4 and not trace.steps


def test_trace_steps_are_valid(rng):
    for _ in range(30):
        p = _random(rng)
        reduced, trace = weak_reduce(p)
        current = p
        for x, kind in trace.steps:
            direction = 'down' if kind.startswith('down') else 'up'
            finder = beat_points if kind.endswith('beat') else weak_points
            assert x in finder(current, direction)
            current = remove_point(current, x)
        assert current == reduced
        assert trace.initial_size - len(trace.steps) == trace.final_size


def test_homotopy_equivalence(circle4):
    assert homotopy_equivalent(chain(['a', 'b']), chain(['x', 'y', 'z', 'w']))
    assert not homotopy_equivalent(chain(['a', 'b', 'c']), circle4)


def test_core_is_order_independent(rng):
    for _ in range(StrataConfig.PROPERTY_SAMPLES):
        p = _random(rng)
        reference, _ = core(p)
        for _ in range(5):
            other, _ = core(p, rng=random.Random(rng.random()))
            assert len(other) == len(reference)
            assert isomorphic(reference, other) is not None


def test_weak_reduce_preserves_homology(rng):
    for _ in range(StrataConfig.PROPERTY_SAMPLES):
        p = _random(rng)
        reduced, _ = weak_reduce(p)
        assert homology(order_complex(p)) == homology(order_complex(reduced))


def test_cones_are_contractible(rng):
    for _ in range(100):
        p = add_top(_random(rng))
        reduced, _ = core(p)
        assert len(reduced) == 1
        weak, _ = weak_reduce(p)
        assert len(weak) == 1
        assert homology(order_complex(p)).betti == [1]


def test_beat_points_are_weak_points(rng):
    for _ in range(100):
        p = _random(rng)
        for direction in ('up', 'down'):
            assert beat_points(p, direction) <= weak_points(p, direction)
