"""
Reduction of finite T0-spaces: beat points, cores, weak points and weak reduction.

Removing a beat point is a strong deformation retract, so repeated removal
reaches the core, unique up to isomorphism. Removing a weak point keeps the
weak homotopy type, which is all the homology computation needs.
"""

import random
import logging
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Optional, Tuple

from poset import FinitePoset, UnknownElement, build_poset, isomorphic, relatives

logger = logging.getLogger(__name__)

DOWN_BEAT = 'down-beat'
UP_BEAT = 'up-beat'
DOWN_WEAK = 'down-weak'
UP_WEAK = 'up-weak'


@dataclass
class ReductionTrace:
    """Removal sequence of a reduction run."""

    steps: List[Tuple[str, str]] = field(default_factory=list)
    initial_size: int = 0
    final_size: int = 0

    def lines(self) -> List[str]:
        return [f"removed {x} {kind}" for x, kind in self.steps]


def _check_direction(direction: str):
    if direction not in ('up', 'down'):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def beat_points(p: FinitePoset, direction: str) -> FrozenSet[str]:
    """
    Points x whose strict down-set (up-set) is the down-set (up-set) of a
    single z. That happens exactly when x has one lower (upper) cover.
    """
    _check_direction(direction)
    if direction == 'down':
        return frozenset(x for x in p if len(p.lower_covers(x)) == 1)
    return frozenset(x for x in p if len(p.upper_covers(x)) == 1)


def remove_point(p: FinitePoset, x: str) -> FinitePoset:
    if x not in p:
        raise UnknownElement(f"unknown element: {x}")
    return p.induced(p.elements - {x})


def is_minimal(p: FinitePoset) -> bool:
    """A minimal finite space has no beat points."""
    return not beat_points(p, 'down') and not beat_points(p, 'up')


Stage = Tuple[str, Callable[[FinitePoset], FrozenSet[str]]]


def _next_removal(p: FinitePoset, stages: List[Stage], rng: Optional[random.Random],
                  pooled: bool) -> Optional[Tuple[str, str]]:
    if pooled:
        candidates = sorted((x, kind) for kind, finder in stages for x in finder(p))
        if not candidates:
            return None
        return rng.choice(candidates) if rng is not None else candidates[0]

    for kind, finder in stages:
        found = sorted(finder(p))
        if found:
            x = rng.choice(found) if rng is not None else found[0]
            return x, kind
    return None


def _reduce(p: FinitePoset, stages: List[Stage], rng: Optional[random.Random],
            pooled: bool = False) -> Tuple[FinitePoset, ReductionTrace]:
    trace = ReductionTrace(initial_size=len(p))
    current = p
    while True:
        step = _next_removal(current, stages, rng, pooled)
        if step is None:
            break
        x, kind = step
        logger.debug(f"Removing {x} ({kind}), {len(current) - 1} points left")
        current = remove_point(current, x)
        trace.steps.append(step)
    trace.final_size = len(current)
    return current, trace


_BEAT_STAGES = [
    (DOWN_BEAT, lambda q: beat_points(q, 'down')),
    (UP_BEAT, lambda q: beat_points(q, 'up')),
]


def core(p: FinitePoset,
         rng: Optional[random.Random] = None) -> Tuple[FinitePoset, ReductionTrace]:
    """
    Remove beat points until none remain.

    Without rng the lexicographically least candidate goes first, down-beat
    before up-beat. With rng the next removal is drawn at random from all
    beat points of either kind.
    """
    result, trace = _reduce(p, _BEAT_STAGES, rng, pooled=rng is not None)
    logger.info(f"Core: {trace.initial_size} -> {trace.final_size} points")
    return result, trace


def is_contractible(p: FinitePoset) -> bool:
    """Non-empty with a singleton core. The empty space is not contractible."""
    if len(p) == 0:
        return False
    reduced, _ = _reduce(p, _BEAT_STAGES, None)
    return len(reduced) == 1


def weak_points(p: FinitePoset, direction: str) -> FrozenSet[str]:
    """Points whose strict down-set (up-set) is contractible."""
    _check_direction(direction)
    found = set()
    for x in p:
        strict = relatives(p, x, direction, strict=True)
        if strict and is_contractible(p.induced(strict)):
            found.add(x)
    return frozenset(found)


_WEAK_STAGES = _BEAT_STAGES + [
    (UP_WEAK, lambda q: weak_points(q, 'up')),
    (DOWN_WEAK, lambda q: weak_points(q, 'down')),
]


def weak_reduce(p: FinitePoset,
                rng: Optional[random.Random] = None) -> Tuple[FinitePoset, ReductionTrace]:
    """
    Remove beat points first, then weak points, until neither exists.

    Priority is down-beat, up-beat, up-weak, down-weak; ties go to the least
    id, or to a random candidate when rng is given.
    """
    result, trace = _reduce(p, _WEAK_STAGES, rng)
    logger.info(f"Weak reduction: {trace.initial_size} -> {trace.final_size} points")
    return result, trace


def homotopy_equivalent(p: FinitePoset, q: FinitePoset) -> bool:
    """True iff the cores are isomorphic."""
    core_p, _ = core(p)
    core_q, _ = core(q)
    return isomorphic(core_p, core_q) is not None


def add_top(p: FinitePoset, name: str = 'top') -> FinitePoset:
    """Cone: p with a new greatest element adjoined."""
    if name in p:
        raise ValueError(f"element {name} already present")
    labeled = [(x, p.display_name(x)) for x in p] + [name]
    pairs = list(p.covers) + [(x, name) for x in p]
    return build_poset(labeled, pairs)
