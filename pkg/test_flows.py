"""
Tests for flow diagrams: validation, canonical keys, enumeration and the
stratified component poset.
"""

import dataclasses
from collections import Counter
from fractions import Fraction

import networkx as nx
import pytest

from complex import homology, order_complex
from flows import (ANNULUS, ComponentSignature, DiagramFormatError, FlowDiagram, SingularKind,
                   _Draft, _break_separatrix, _trace,
                   UnsupportedSignature, build_stratified_poset, canonical_form, class_ids,
                   codimension, codimension_pair, degeneracy_profile, enumerate_component, index,
                   index_sum, parse_diagram, pattern_name, format_diagram, resolution_moves,
                   validate)
from poset import check_cell_complex
from reduction import core, weak_points, weak_reduce

HEADER = """
singular a source
singular b source
singular inf sink
"""

GENERIC_FOUR = HEADER + """
singular u0 boundary_saddle(1)
singular u1 boundary_saddle(1)
singular v0 boundary_saddle(1)
singular v1 boundary_saddle(1)
singular v2 boundary_saddle(1)
singular v3 boundary_saddle(1)
boundary 0 u0[i] u1[o]
boundary 1 v0[i] v1[o] v2[i] v3[o]
sep a:0 -> u0:0
sep a:1 -> v0:0
sep b:0 -> v2:0
"""

FOUR_WITH_SEPARATRIX = GENERIC_FOUR.replace(
    "sep a:0 -> u0:0\nsep a:1 -> v0:0\nsep b:0 -> v2:0",
    "sep b:0 -> u0:0\nsep a:0 -> v0:0\nsep u1:0 -> v2:0")

PINCHED = HEADER + """
singular u0 boundary_saddle(1)
singular u1 boundary_saddle(1)
singular v0 boundary_saddle(1)
singular v1 boundary_saddle(2)
singular v2 boundary_saddle(1)
boundary 0 u0[i] u1[o]
boundary 1 v0[i] v1[oi] v2[o]
sep a:0 -> u0:0
sep a:1 -> v0:0
sep b:0 -> v1:1
"""

SAME_SOURCE_SADDLE = HEADER + """
singular s0 saddle(1)
singular u0 boundary_saddle(1)
singular u1 boundary_saddle(1)
singular v0 boundary_saddle(1)
singular v1 boundary_saddle(1)
boundary 0 u0[i] u1[o]
boundary 1 v0[i] v1[o]
sep a:0 -> s0:0
sep a:1 -> s0:2
sep b:0 -> u0:0
sep b:1 -> v0:0
"""

LONELY_SADDLE = HEADER + """
singular s0 saddle(1)
singular u0 boundary_saddle(1)
singular v0 boundary_saddle(1)
singular v1 boundary_saddle(1)
boundary 0 u0[i]
boundary 1 v0[i] v1[o]
sep a:0 -> s0:0
sep b:0 -> s0:2
sep a:1 -> u0:0
sep b:1 -> v0:0
"""


@pytest.fixture(scope='module')
def classes():
    return enumerate_component(ANNULUS, 3)


@pytest.fixture(scope='module')
def component(classes):
    return build_stratified_poset(classes)


def _rebuild(d, rename=lambda x: x, reflect=False, swap=False):
    """Apply a relabeling, orientation reversal and/or hole swap."""
    def slot(owner, j):
        kind = d.kinds[owner]
        if not reflect or not kind.is_multi_saddle:
            return j
        n = len(d.port_words[owner])
        return (-j) % n if kind.tag == 'saddle' else n - 1 - j

    kinds = {rename(sid): SingularKind(kind.tag, kind.k) for sid, kind in d.singulars}
    ports = {rename(sid): ''.join(word[slot(sid, j)] for j in range(len(word)))
             for sid, word in d.ports}
    circles = [[rename(sid) for sid in (reversed(c) if reflect else c)] for c in d.circles]
    if swap:
        circles.reverse()
    feeds = {}
    for s in d.separatrices:
        target = (rename(s.target), slot(s.target, s.target_slot))
        if d.kinds[s.source].tag == 'source':
            feeds[target] = (rename(s.source), None)
        else:
            feeds[target] = (rename(s.source), slot(s.source, s.source_slot))
    return FlowDiagram.from_parts(kinds, ports, circles, feeds)


def test_index_values():
    assert index(SingularKind('source')) == 1
    assert index(SingularKind('boundary_saddle', 1)) == Fraction(-1, 2)
    assert index(SingularKind('boundary_saddle', 3)) == Fraction(-3, 2)
    assert index(SingularKind('saddle', 2)) == -2


def test_pattern_names():
    assert pattern_name(('o', 'i')) == 'two-saddle'
    assert pattern_name(('oio', 'i')) == 'three-halves-out'
    assert pattern_name(('io', 'i', 'o')) == 'pinched-mirror'
    assert pattern_name(('i',)) is None


def test_codimension_pair():
    assert codimension_pair(parse_diagram(GENERIC_FOUR)) == (0, 0)
    assert codimension_pair(parse_diagram(PINCHED)) == (1, 0)
    assert codimension_pair(parse_diagram(FOUR_WITH_SEPARATRIX)) == (0, 1)
    three_halves = parse_diagram(HEADER + """
singular u0 boundary_saddle(1)
singular u1 boundary_saddle(1)
singular v0 boundary_saddle(1)
singular v1 boundary_saddle(3)
boundary 0 u0[i] u1[o]
boundary 1 v0[i] v1[oio]
sep a:0 -> u0:0
sep a:1 -> v0:0
sep b:0 -> v1:1
""")
    assert codimension_pair(three_halves) == (2, 0)
    assert validate(three_halves).passed
    assert degeneracy_profile(three_halves) == 'three-halves'


def test_validate_accepts_generic_and_degenerate():
    for text in (GENERIC_FOUR, FOUR_WITH_SEPARATRIX, PINCHED):
        report = validate(parse_diagram(text))
        assert report.passed, report.failures


def test_validate_rejects_same_source_saddle():
    report = validate(parse_diagram(SAME_SOURCE_SADDLE))
    assert 'distinct-sources' in report.rules()
    assert ('distinct-sources', ('a', 's0')) in report.failures


def test_validate_rejects_single_boundary_saddle():
    assert 'boundary-pattern' in validate(parse_diagram(LONELY_SADDLE)).rules()


def test_validate_rejects_circuit_and_unfed_port():
    looped = GENERIC_FOUR.replace("sep a:0 -> u0:0", "sep v1:0 -> u0:0\nsep u1:0 -> v2:0") \
                         .replace("sep b:0 -> v2:0\n", "")
    assert 'circuit' in validate(parse_diagram(looped)).rules()

    unfed = GENERIC_FOUR.replace("sep b:0 -> v2:0\n", "")
    assert 'in-port-unfed' in validate(parse_diagram(unfed)).rules()


def test_validate_rejects_wrong_signature():
    report = validate(parse_diagram(GENERIC_FOUR.replace("singular b source\n", "")))
    assert 'source-count' in report.rules()


def test_diagram_text_round_trip(classes):
    for diagrams in classes.values():
        for d in diagrams:
            assert parse_diagram(format_diagram(d)) == d


@pytest.mark.parametrize('text', [
    "singular a blob\n",
    "singular u0 boundary_saddle(1)\n",
    "boundary 0 u0[i]\n",
    "sep a0 -> b:1\n",
    "wiggle\n",
])
def test_diagram_parse_errors(text):
    with pytest.raises(DiagramFormatError):
        parse_diagram(text)


def test_canonical_form_symmetries(classes):
    def rename(x):
        return f"z{x[::-1]}"

    for diagrams in classes.values():
        for d in diagrams:
            key = canonical_form(d)
            for variant in (_rebuild(d, rename=rename), _rebuild(d, swap=True),
                            _rebuild(d, reflect=True), _rebuild(d, rename, True, True)):
                assert validate(variant).passed
                assert canonical_form(variant) == key


def test_enumeration_counts(classes):
    assert {q: len(v) for q, v in classes.items()} == {0: 3, 1: 8, 2: 12, 3: 6}
    keys = [canonical_form(d) for d in classes[0]]
    assert len(set(keys)) == 3


def test_enumeration_splits(classes):
    def split(q):
        counts = {}
        for d in classes[q]:
            counts[degeneracy_profile(d)] = counts.get(degeneracy_profile(d), 0) + 1
        return counts

    assert split(0) == {'generic': 3}
    assert split(1) == {'separatrix': 6, 'pinching': 2}
    assert split(2) == {'separatrix+separatrix': 5, 'pinching+separatrix': 4, 'three-halves': 3}
    assert split(3) == {'three-halves+separatrix': 6}


def test_enumerated_diagrams_satisfy_poincare_hopf(classes):
    for diagrams in classes.values():
        for d in diagrams:
            assert index_sum(d) == -3
            assert all(pattern_name(d.circle_word(c)) for c in range(2))


def test_unsupported_signature():
    with pytest.raises(UnsupportedSignature):
        enumerate_component(ComponentSignature(k_plus=(3, 0)), 1)
    with pytest.raises(ValueError):
        enumerate_component(ANNULUS, 4)


def test_resolution_moves_examples():
    assert resolution_moves(parse_diagram(GENERIC_FOUR)) == []

    broken = resolution_moves(parse_diagram(FOUR_WITH_SEPARATRIX))
    assert len(broken) in (1, 2)
    assert all(codimension(d) == 0 for d in broken)

    resolved = resolution_moves(parse_diagram(PINCHED))
    assert len(resolved) == 2
    patterns = sorted(pattern_name(d.circle_word(1)) for d in resolved)
    assert patterns == ['four-saddle', 'two-saddle']


def test_resolution_moves_lower_codimension(classes):
    for q, diagrams in classes.items():
        for d in diagrams:
            for result in resolution_moves(d):
                assert validate(result).passed
                assert codimension(result) == q - 1


def test_component_is_a_cell_complex(component):
    assert component.strata_sizes() == {0: 3, 1: 8, 2: 12, 3: 6}
    report = check_cell_complex(component)
    assert report.passed
    assert report.graded
    assert nx.is_weakly_connected(component.poset.graph)


def test_component_ids(classes):
    named = class_ids(classes)
    assert sorted(named)[:3] == ['q0_1', 'q0_2', 'q0_3']
    assert len(named) == 29


def test_component_reduction_and_homology(component):
    reduced, _ = core(component.poset)
    assert len(reduced) == 12
    # weak reduction continues past the core through up-weak points
    assert weak_points(reduced, 'up')

    weak, _ = weak_reduce(component.poset)
    assert len(weak) == 8
    assert homology(order_complex(weak)).betti == [1, 0, 2]
    full = homology(order_complex(component.poset))
    assert full.betti == [1, 0, 2]
    assert full.torsion_free


@pytest.mark.parametrize('text, rule', [
    (GENERIC_FOUR.replace("singular inf sink\n", ""), 'sink-count'),
    (GENERIC_FOUR.replace("u1[o]\nboundary 1 ", "u1[o] "), 'circle-count'),
    (GENERIC_FOUR.replace("u1[o]", "u1[oo]"), 'port-word'),
    (GENERIC_FOUR.replace("sep a:0 -> u0:0", "sep zz:0 -> u0:0"), 'unknown-singular'),
    (GENERIC_FOUR.replace("sep a:0 -> u0:0", "sep a:0 -> u1:0"), 'port-direction'),
    (GENERIC_FOUR + "sep b:1 -> u0:0\n", 'in-port-overfed'),
    (GENERIC_FOUR.replace("sep a:0 -> u0:0\nsep a:1 -> v0:0",
                          "sep v3:0 -> u0:0\nsep v3:0 -> v0:0"), 'out-port-reuse'),
    (GENERIC_FOUR + "singular s0 saddle(1)\nsep a:2 -> s0:0\nsep b:1 -> s0:2\n", 'poincare-hopf'),
    (GENERIC_FOUR.replace("sep a:1 -> v0:0", "sep b:1 -> v0:0"), 'disconnected'),
])
def test_validate_flags_each_rule(text, rule):
    assert rule in validate(parse_diagram(text)).rules()


def test_validate_flags_boundary_saddle_off_circle():
    d = parse_diagram(GENERIC_FOUR)
    detached = dataclasses.replace(d, circles=(d.circles[0], d.circles[1][:-1]))
    assert 'boundary-membership' in validate(detached).rules()


def test_validate_reports_every_stage():
    text = GENERIC_FOUR.replace("singular inf sink\n", "") \
                       .replace("sep a:1 -> v0:0", "sep b:1 -> v0:0")
    rules = set(validate(parse_diagram(text)).rules())
    assert {'sink-count', 'distinct-sources', 'disconnected'} <= rules

    rules = set(validate(parse_diagram(GENERIC_FOUR.replace("u1[o]", "u1[oo]"))).rules())
    assert {'port-word', 'boundary-pattern'} <= rules


def test_sink_separatrices_are_written():
    text = format_diagram(parse_diagram(GENERIC_FOUR))
    lines = text.splitlines()
    for port in ('u1:0', 'v1:0', 'v3:0'):
        assert any(line.startswith(f"sep {port} -> inf:") for line in lines)
    assert parse_diagram(text) == parse_diagram(GENERIC_FOUR)


def test_sink_separatrix_must_leave_a_free_out_port():
    with pytest.raises(DiagramFormatError):
        parse_diagram(GENERIC_FOUR + "sep u0:0 -> inf:0\n")
    with pytest.raises(DiagramFormatError):
        parse_diagram(FOUR_WITH_SEPARATRIX + "sep u1:0 -> inf:0\n")


def test_source_rotation_is_not_part_of_the_class():
    original = parse_diagram(GENERIC_FOUR)
    rotated = parse_diagram(GENERIC_FOUR.replace("sep a:0 -> u0:0\nsep a:1 -> v0:0",
                                                 "sep a:1 -> u0:0\nsep a:0 -> v0:0"))
    assert rotated != original
    assert validate(rotated).passed
    assert canonical_form(rotated) == canonical_form(original)


def _pinching_separatrices(d):
    return [(out, into) for out, into in sorted(d.target_map.items())
            if d.kinds[out[0]].tag == 'boundary_saddle' and d.kinds[out[0]].k == 2]


def _break_alone(d, out, into, sigma):
    draft = _Draft(d)
    draft.feeds[into] = (_trace(d, out, sigma), None)
    return draft.diagram()


def test_pinching_separatrix_goes_with_the_pinching(classes):
    d = class_ids(classes)['q2_5']
    pinned = _pinching_separatrices(d)
    assert pinned

    kept = {canonical_form(r) for r in resolution_moves(d)}
    assert all(codimension_pair(r)[0] == 0 for r in resolution_moves(d))
    for out, into in pinned:
        assert _break_separatrix(d, out, into) == []
        for sigma in (1, -1):
            alone = _break_alone(d, out, into, sigma)
            # a valid codim-1 diagram that still has the pinching, never a cover
            assert validate(alone).passed
            assert codimension_pair(alone) == (1, 0)
            assert canonical_form(alone) not in kept


def test_pinching_separatrices_are_never_broken_alone(classes):
    for diagrams in classes.values():
        for d in diagrams:
            for out, into in _pinching_separatrices(d):
                assert _break_separatrix(d, out, into) == []


def test_component_weak_reduction_trace(component):
    weak, trace = weak_reduce(component.poset)
    kinds = [kind for _, kind in trace.steps]
    assert len(kinds) == 21
    # beat points down to the 12-point core, one weak point, then beat points again
    assert Counter(kinds[:17]) == {'down-beat': 4, 'up-beat': 13}
    assert kinds[17] == 'up-weak'
    assert all(kind.endswith('beat') for kind in kinds[18:])
    assert Counter(component.codim[x] for x in weak) == {0: 3, 1: 2, 2: 1, 3: 2}
