"""
Multi-saddle connection diagrams of gradient flows on the annulus.

A diagram is drawn in the plane with the sink at infinity and the two
boundary circles as holes. Every multi-saddle carries a counter-clockwise
word of ports ('i' incoming, 'o' outgoing separatrix). An in-port is fed by
exactly one source or one out-port; out-ports that feed nothing end in the
sink. The feed graph (sources, holes and interior saddles as nodes) must be
a spanning tree, which rules out circuits and both incoming separatrices of
a saddle coming from one source.

Sources and the sink carry no port word. Only the set of separatrices at a
source is kept, not their cyclic order; the sink separatrices are the free
out-ports and are written out explicitly by format_diagram.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from config import StrataConfig
from poset import StratifiedPoset, build_poset

logger = logging.getLogger(__name__)

Port = Tuple[str, int]
NodeKey = Tuple[str, str]

SOURCE = 'source'
SINK = 'sink'
SADDLE = 'saddle'
BOUNDARY_SADDLE = 'boundary_saddle'

# Boundary structures as ccw words of per-singular port words
BOUNDARY_PATTERNS: Dict[str, Tuple[str, ...]] = {
    'two-saddle': ('i', 'o'),
    'four-saddle': ('i', 'o', 'i', 'o'),
    'pinched': ('i', 'oi', 'o'),
    'pinched-mirror': ('i', 'o', 'io'),
    'three-halves-out': ('i', 'oio'),
    'three-halves-in': ('o', 'ioi'),
}


class FlowError(Exception):
    """Base class for flow diagram errors."""


class UnsupportedSignature(FlowError):
    """Only the (1,0,2,0) annulus component is enumerated."""


class StratificationError(FlowError):
    """A resolution move left the enumerated class list."""


class DiagramFormatError(FlowError):
    """Malformed diagram text."""


@dataclass(frozen=True)
class SingularKind:
    """Singular point type; circle is set for boundary saddles only."""

    tag: str
    k: int = 0
    circle: Optional[int] = None

    @property
    def is_multi_saddle(self) -> bool:
        return self.tag in (SADDLE, BOUNDARY_SADDLE)

    def label(self) -> str:
        return f"{self.tag}({self.k})" if self.is_multi_saddle else self.tag

    @classmethod
    def parse(cls, text: str) -> 'SingularKind':
        if text in (SOURCE, SINK):
            return cls(text)
        for tag in (BOUNDARY_SADDLE, SADDLE):
            prefix = f"{tag}("
            if text.startswith(prefix) and text.endswith(')'):
                try:
                    k = int(text[len(prefix):-1])
                except ValueError:
                    break
                if k < 1:
                    break
                return cls(tag, k)
        raise DiagramFormatError(f"unknown singular kind {text!r}")


@dataclass(frozen=True)
class ComponentSignature:
    k_minus: Tuple[int, int] = (1, 0)
    k_plus: Tuple[int, int] = (2, 0)
    surface: str = 'annulus'


ANNULUS = ComponentSignature()


@dataclass(frozen=True, order=True)
class Separatrix:
    source: str
    source_slot: int
    target: str
    target_slot: int


def index(kind: SingularKind) -> Fraction:
    if kind.tag in (SOURCE, SINK):
        return Fraction(1)
    if kind.tag == SADDLE:
        return Fraction(-kind.k)
    return Fraction(-kind.k, 2)


def opposite_port(direction: str) -> str:
    return 'o' if direction == 'i' else 'i'


def pattern_name(word: Sequence[str]) -> Optional[str]:
    """Name of the boundary structure a circle word realizes, up to rotation."""
    word = tuple(word)
    for name, pattern in BOUNDARY_PATTERNS.items():
        if len(pattern) != len(word):
            continue
        if any(word[r:] + word[:r] == pattern for r in range(len(word))):
            return name
    return None


@dataclass(frozen=True)
class FlowDiagram:
    """
    Immutable connection diagram.

    ports holds the ccw port word of every multi-saddle; circles lists the
    boundary singulars of each circle in ccw order; separatrices lists every
    separatrix except those running into the sink.
    """

    singulars: Tuple[Tuple[str, SingularKind], ...]
    ports: Tuple[Tuple[str, str], ...]
    circles: Tuple[Tuple[str, ...], ...]
    separatrices: Tuple[Separatrix, ...]

    @classmethod
    def from_parts(cls, kinds: Dict[str, SingularKind], ports: Dict[str, str],
                   circles: Sequence[Sequence[str]],
                   feeds: Dict[Port, Tuple[str, Optional[int]]]) -> 'FlowDiagram':
        """Assemble from a feed map; source slots are numbered by sorted target."""
        located = dict(kinds)
        for c, members in enumerate(circles):
            for sid in members:
                located[sid] = SingularKind(BOUNDARY_SADDLE, kinds[sid].k, c)

        slots: Dict[str, int] = {}
        seps = []
        for (target, tslot), (src, sslot) in sorted(feeds.items()):
            if sslot is None:
                sslot = slots.get(src, 0)
                slots[src] = sslot + 1
            seps.append(Separatrix(src, sslot, target, tslot))
        return cls(
            singulars=tuple(sorted(located.items())),
            ports=tuple(sorted(ports.items())),
            circles=tuple(tuple(c) for c in circles),
            separatrices=tuple(sorted(seps)),
        )

    @cached_property
    def kinds(self) -> Dict[str, SingularKind]:
        return dict(self.singulars)

    @cached_property
    def port_words(self) -> Dict[str, str]:
        return dict(self.ports)

    def ids_of(self, tag: str) -> List[str]:
        return sorted(x for x, kind in self.singulars if kind.tag == tag)

    def multi_saddles(self) -> List[str]:
        return sorted(x for x, kind in self.singulars if kind.is_multi_saddle)

    def direction(self, port: Port) -> str:
        owner, slot = port
        return self.port_words[owner][slot]

    @cached_property
    def feeder_map(self) -> Dict[Port, Port]:
        return {(s.target, s.target_slot): (s.source, s.source_slot)
                for s in self.separatrices if self.kinds[s.target].tag != SINK}

    @cached_property
    def target_map(self) -> Dict[Port, Port]:
        return {(s.source, s.source_slot): (s.target, s.target_slot)
                for s in self.separatrices
                if self.kinds[s.source].is_multi_saddle and self.kinds[s.target].tag != SINK}

    def sink_separatrices(self) -> List[Separatrix]:
        """Separatrices absorbed by the sink: every out-port that feeds nothing."""
        sinks = self.ids_of(SINK)
        if not sinks:
            return []
        ends = [(sid, j) for sid in self.multi_saddles()
                for j, w in enumerate(self.port_words.get(sid, ''))
                if w == 'o' and (sid, j) not in self.target_map]
        return [Separatrix(sid, j, sinks[0], n) for n, (sid, j) in enumerate(ends)]

    def fed_by(self, source: str) -> List[Port]:
        return sorted(t for t, (s, _) in self.feeder_map.items() if s == source)

    @cached_property
    def nodes(self) -> Dict[NodeKey, List[Port]]:
        """Holes and interior saddles with their ports in ccw order."""
        nodes: Dict[NodeKey, List[Port]] = {}
        for c, members in enumerate(self.circles):
            nodes[('hole', str(c))] = [(sid, j) for sid in members
                                       for j in range(len(self.port_words[sid]))]
        for sid in self.ids_of(SADDLE):
            nodes[(SADDLE, sid)] = [(sid, j) for j in range(len(self.port_words[sid]))]
        return nodes

    @cached_property
    def owner_node(self) -> Dict[str, NodeKey]:
        return {owner: key for key, ports in self.nodes.items() for owner, _ in ports}

    @cached_property
    def position(self) -> Dict[Port, int]:
        return {port: i for ports in self.nodes.values() for i, port in enumerate(ports)}

    def circle_word(self, c: int) -> Tuple[str, ...]:
        return tuple(self.port_words[sid] for sid in self.circles[c])


def index_sum(d: FlowDiagram) -> Fraction:
    """Sum of indices over multi-saddles."""
    return sum((index(kind) for _, kind in d.singulars if kind.is_multi_saddle), Fraction(0))


def codimension_pair(d: FlowDiagram) -> Tuple[int, int]:
    q1 = 0
    for _, kind in d.singulars:
        if kind.tag == SADDLE:
            q1 += (kind.k - 1) * 2
        elif kind.tag == BOUNDARY_SADDLE:
            q1 += kind.k - 1
    q2 = len(d.target_map)
    return q1, q2


def codimension(d: FlowDiagram) -> int:
    return sum(codimension_pair(d))


def degeneracy_profile(d: FlowDiagram) -> str:
    """Short label of the degeneracies present, e.g. 'pinching+separatrix'."""
    parts = []
    for _, kind in d.singulars:
        if kind.tag == BOUNDARY_SADDLE and kind.k == 3:
            parts.append('three-halves')
    for _, kind in d.singulars:
        if kind.tag == BOUNDARY_SADDLE and kind.k == 2:
            parts.append('pinching')
    for _, kind in d.singulars:
        if kind.tag == SADDLE and kind.k > 1:
            parts.append(f"{kind.k}-saddle")
    parts.extend(['separatrix'] * codimension_pair(d)[1])
    return '+'.join(parts) if parts else 'generic'


STRUCTURAL_RULES = {'unknown-singular', 'port-direction', 'port-word', 'boundary-membership'}


@dataclass
class ValidationReport:
    failures: List[Tuple[str, Tuple[str, ...]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def rules(self) -> List[str]:
        return sorted({rule for rule, _ in self.failures})

    def fail(self, rule: str, *ids: str):
        self.failures.append((rule, tuple(ids)))


def _check_ports(d: FlowDiagram, report: ValidationReport):
    words = d.port_words
    for sid, kind in d.singulars:
        if not kind.is_multi_saddle:
            if sid in words:
                report.fail('port-word', sid)
            continue
        word = words.get(sid, '')
        if kind.tag == SADDLE:
            alternating = all(word[j] != word[(j + 1) % len(word)] for j in range(len(word)))
            if len(word) != 2 * kind.k + 2 or not alternating:
                report.fail('port-word', sid)
        elif len(word) != kind.k or set(word) - {'i', 'o'}:
            report.fail('port-word', sid)

    on_circles = [sid for members in d.circles for sid in members]
    boundary = d.ids_of(BOUNDARY_SADDLE)
    if sorted(on_circles) != boundary:
        report.fail('boundary-membership', *sorted(set(on_circles) ^ set(boundary)))


def _check_separatrices(d: FlowDiagram, report: ValidationReport):
    kinds, words = d.kinds, d.port_words
    seen_out, seen_in = set(), set()
    for s in d.separatrices:
        if s.source not in kinds or s.target not in kinds:
            report.fail('unknown-singular', s.source, s.target)
            continue
        src, tgt = kinds[s.source], kinds[s.target]
        if src.tag == SINK or tgt.tag == SOURCE:
            report.fail('port-direction', s.source, s.target)
            continue
        if src.is_multi_saddle:
            if not 0 <= s.source_slot < len(words.get(s.source, "")) or words[s.source][s.source_slot] != 'o':
                report.fail('port-direction', s.source)
                continue
            if (s.source, s.source_slot) in seen_out:
                report.fail('out-port-reuse', s.source)
            seen_out.add((s.source, s.source_slot))
        if tgt.is_multi_saddle:
            if not 0 <= s.target_slot < len(words.get(s.target, "")) or words[s.target][s.target_slot] != 'i':
                report.fail('port-direction', s.target)
                continue
            if (s.target, s.target_slot) in seen_in:
                report.fail('in-port-overfed', s.target)
            seen_in.add((s.target, s.target_slot))

    for sid in d.multi_saddles():
        for j, direction in enumerate(words.get(sid, '')):
            if direction == 'i' and (sid, j) not in seen_in:
                report.fail('in-port-unfed', sid)


def _check_tree(d: FlowDiagram, report: ValidationReport):
    graph = nx.MultiGraph()
    sources = d.ids_of(SOURCE)
    graph.add_nodes_from((SOURCE, s) for s in sources)
    graph.add_nodes_from(d.nodes)

    def node_of(owner: str) -> NodeKey:
        return (SOURCE, owner) if owner in sources else d.owner_node[owner]

    for (target, _), (feeder, _) in sorted(d.feeder_map.items()):
        graph.add_edge(node_of(feeder), node_of(target))

    for u, v in sorted({tuple(sorted(e)) for e in graph.edges()}):
        count = graph.number_of_edges(u, v)
        if u == v:
            report.fail('circuit', u[1])
        elif count > 1:
            rule = 'distinct-sources' if SOURCE in (u[0], v[0]) else 'circuit'
            report.fail(rule, *sorted((u[1], v[1])))

    for cycle in nx.cycle_basis(nx.Graph(graph)):
        report.fail('circuit', *sorted(n[1] for n in cycle))

    if graph.number_of_nodes() and not nx.is_connected(graph):
        for component in sorted(nx.connected_components(graph), key=lambda c: sorted(c))[1:]:
            report.fail('disconnected', *sorted(n[1] for n in component))


def validate(d: FlowDiagram, sig: ComponentSignature = ANNULUS) -> ValidationReport:
    """Check a diagram against every realizability rule; lists all failures."""
    report = ValidationReport()
    sinks, sources = d.ids_of(SINK), d.ids_of(SOURCE)
    if len(sinks) != sig.k_minus[0]:
        report.fail('sink-count', *sinks)
    if len(sources) != sig.k_plus[0]:
        report.fail('source-count', *sources)
    if len(d.circles) != 2:
        report.fail('circle-count')

    _check_ports(d, report)
    _check_separatrices(d, report)

    expected = -Fraction(sig.k_minus[0] + sig.k_plus[0])
    if index_sum(d) != expected:
        report.fail('poincare-hopf', *d.multi_saddles())

    for c, members in enumerate(d.circles):
        if not all(sid in d.port_words for sid in members):
            continue
        if pattern_name(d.circle_word(c)) is None:
            report.fail('boundary-pattern', *members)

    # the feed graph is only defined once every separatrix end is known
    if not set(report.rules()) & STRUCTURAL_RULES:
        _check_tree(d, report)
    return report


def _port_token(d: FlowDiagram, port: Port, sigma: int) -> str:
    owner, slot = port
    kind = d.kinds[owner]
    direction = d.direction(port)
    if kind.tag == SADDLE:
        return f"s{kind.k}{direction}"
    pos = slot if sigma == 1 else kind.k - 1 - slot
    return f"b{kind.k}{direction}{pos}"


def _encode(d: FlowDiagram, node: NodeKey, start: int, sigma: int,
            parent: Optional[Port]) -> str:
    ports = d.nodes[node]
    n = len(ports)
    tokens = []
    for t in range(n):
        port = ports[(start + sigma * t) % n]
        token = _port_token(d, port, sigma)
        if port == parent:
            token += '^'
        elif d.direction(port) == 'i':
            feeder = d.feeder_map[port]
            if d.kinds[feeder[0]].tag == SOURCE:
                children = sorted(_enter(d, other, sigma)
                                  for other in d.fed_by(feeder[0]) if other != port)
                token += 'src[' + ''.join(f"({c})" for c in children) + ']'
            else:
                token += f"({_enter(d, feeder, sigma)})"
        elif port in d.target_map:
            token += f"({_enter(d, d.target_map[port], sigma)})"
        tokens.append(token)
    return ' '.join(tokens)


def _enter(d: FlowDiagram, port: Port, sigma: int) -> str:
    return _encode(d, d.owner_node[port[0]], d.position[port], sigma, port)


def canonical_form(d: FlowDiagram) -> bytes:
    """
    Key invariant under relabeling, circle rotation, hole swap and reflection.

    The feed tree is serialized from every multi-saddle node, start port and
    orientation; the least serialization wins. Children of a source are
    sorted, so the cyclic order of separatrices around a source is ignored.
    """
    best = None
    for node in sorted(d.nodes):
        for start in range(len(d.nodes[node])):
            for sigma in (1, -1):
                text = _encode(d, node, start, sigma, None)
                if best is None or text < best:
                    best = text
    return (best or '').encode('ascii')


# enumeration

def _partitions(n: int, largest: Optional[int] = None) -> Iterator[List[int]]:
    if largest is None:
        largest = n
    if n == 0:
        yield []
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield [k] + rest


def _pattern_index(name: str) -> Fraction:
    return sum((Fraction(-len(w), 2) for w in BOUNDARY_PATTERNS[name]), Fraction(0))


def _skeleton(patterns: Tuple[str, str], saddles: List[int]):
    kinds: Dict[str, SingularKind] = {
        'a': SingularKind(SOURCE), 'b': SingularKind(SOURCE), 'inf': SingularKind(SINK),
    }
    ports: Dict[str, str] = {}
    circles: List[List[str]] = []
    for c, (name, stem) in enumerate(zip(patterns, ('u', 'v'))):
        members = []
        for j, word in enumerate(BOUNDARY_PATTERNS[name]):
            sid = f"{stem}{j}"
            kinds[sid] = SingularKind(BOUNDARY_SADDLE, len(word), c)
            ports[sid] = word
            members.append(sid)
        circles.append(members)
    for j, k in enumerate(saddles):
        sid = f"s{j}"
        kinds[sid] = SingularKind(SADDLE, k)
        ports[sid] = 'io' * (k + 1)
    return kinds, ports, circles


def _wirings(in_ports: List[Port], out_ports: List[Port], sources: List[str],
             budget: int) -> Iterator[Dict[Port, Tuple[str, Optional[int]]]]:
    """Every feeder assignment using at most budget out-ports as feeders."""
    feeds: Dict[Port, Tuple[str, Optional[int]]] = {}
    used = set()

    def place(i: int) -> Iterator[Dict[Port, Tuple[str, Optional[int]]]]:
        if i == len(in_ports):
            yield dict(feeds)
            return
        port = in_ports[i]
        for src in sources:
            feeds[port] = (src, None)
            yield from place(i + 1)
        if len(used) < budget:
            for out in out_ports:
                if out in used or out[0] == port[0]:
                    continue
                used.add(out)
                feeds[port] = out
                yield from place(i + 1)
                used.discard(out)
        feeds.pop(port, None)

    yield from place(0)


def enumerate_component(sig: ComponentSignature = ANNULUS,
                        max_codim: int = StrataConfig.MAX_CODIM) -> Dict[int, List[FlowDiagram]]:
    """
    All topological equivalence classes of codimension <= max_codim.

    Returns codim -> diagrams sorted by canonical key.
    """
    if sig != ANNULUS:
        raise UnsupportedSignature(f"unsupported signature {sig}")
    if not 0 <= max_codim <= StrataConfig.MAX_CODIM:
        raise ValueError(f"max_codim must lie in 0..{StrataConfig.MAX_CODIM}, got {max_codim}")

    found: Dict[bytes, FlowDiagram] = {}
    candidates = 0
    target = -Fraction(sig.k_minus[0] + sig.k_plus[0])
    for pair in combinations_with_replacement(sorted(BOUNDARY_PATTERNS), 2):
        needed = target - _pattern_index(pair[0]) - _pattern_index(pair[1])
        if needed > 0 or needed.denominator != 1:
            continue
        for saddles in _partitions(int(-needed)):
            kinds, ports, circles = _skeleton(pair, saddles)
            skeleton = FlowDiagram.from_parts(kinds, ports, circles, {})
            q1, _ = codimension_pair(skeleton)
            if q1 > max_codim:
                continue
            in_ports = [(sid, j) for sid in sorted(ports) for j, w in enumerate(ports[sid]) if w == 'i']
            out_ports = [(sid, j) for sid in sorted(ports) for j, w in enumerate(ports[sid]) if w == 'o']
            for feeds in _wirings(in_ports, out_ports, ['a', 'b'], max_codim - q1):
                d = FlowDiagram.from_parts(kinds, ports, circles, feeds)
                if not validate(d, sig).passed:
                    continue
                candidates += 1
                found.setdefault(canonical_form(d), d)

    classes: Dict[int, List[FlowDiagram]] = {q: [] for q in range(max_codim + 1)}
    for key in sorted(found):
        classes[codimension(found[key])].append(found[key])
    logger.info(f"Enumerated {candidates} valid wirings into "
                f"{sum(len(v) for v in classes.values())} classes")
    return classes


# resolution moves

class _Draft:
    """Mutable copy of a diagram used while applying one move."""

    def __init__(self, d: FlowDiagram):
        self.kinds = dict(d.kinds)
        self.ports = dict(d.port_words)
        self.circles = [list(c) for c in d.circles]
        self.feeds: Dict[Port, Tuple[str, Optional[int]]] = {}
        for target, (src, slot) in d.feeder_map.items():
            self.feeds[target] = (src, None) if d.kinds[src].tag == SOURCE else (src, slot)

    def fresh(self, stem: str) -> str:
        n = 0
        while f"{stem}{n}" in self.kinds:
            n += 1
        return f"{stem}{n}"

    def relocate(self, mapping: Dict[Port, Port]):
        """Move separatrix ends from old ports to new ports, all at once."""
        self.feeds = {mapping.get(t, t): (mapping.get(f, f) if f[1] is not None else f)
                      for t, f in self.feeds.items()}

    def drop(self, sid: str):
        del self.kinds[sid]
        del self.ports[sid]

    def add_saddle(self, word: str, connections: Dict[int, Port]) -> str:
        """New interior saddle; ports rotate so slot 0 is incoming."""
        sid = self.fresh('s')
        shift = 0 if word[0] == 'i' else 1
        self.kinds[sid] = SingularKind(SADDLE, len(word) // 2 - 1)
        self.ports[sid] = word[shift:] + word[:shift]
        self.relocate({old: (sid, (j - shift) % len(word)) for j, old in connections.items()})
        return sid

    def replace_on_circle(self, sid: str, new_ids: List[str]):
        for members in self.circles:
            if sid in members:
                j = members.index(sid)
                members[j:j + 1] = new_ids
                return

    def diagram(self) -> FlowDiagram:
        return FlowDiagram.from_parts(self.kinds, self.ports, self.circles, self.feeds)


def _trace(d: FlowDiagram, port: Port, sigma: int, skip: Tuple[str, ...] = ()) -> str:
    """
    Source reached by walking the port cycle of port's node in direction
    sigma to the first in-port and following its feeder upstream.
    """
    ports = d.nodes[d.owner_node[port[0]]]
    n, start = len(ports), d.position[port]
    for t in range(1, n):
        q = ports[(start + sigma * t) % n]
        if q[0] in skip or d.direction(q) != 'i':
            continue
        feeder = d.feeder_map[q]
        if d.kinds[feeder[0]].tag == SOURCE:
            return feeder[0]
        return _trace(d, feeder, sigma)
    raise StratificationError(f"no incoming separatrix next to {port[0]}:{port[1]}")


def _break_separatrix(d: FlowDiagram, out: Port, into: Port) -> List[FlowDiagram]:
    kind = d.kinds[out[0]]
    # A separatrix leaving a pinching goes away only together with the
    # pinching. Breaking it alone yields valid codim-1 diagrams, but those
    # covers make the component contractible.
    if kind.tag == BOUNDARY_SADDLE and kind.k == 2:
        return []
    results = []
    for sigma in (1, -1):
        draft = _Draft(d)
        draft.feeds[into] = (_trace(d, out, sigma), None)
        results.append(draft.diagram())
    return results


def _resolve_pinching(d: FlowDiagram, pid: str) -> List[FlowDiagram]:
    x, y = d.port_words[pid]

    split = _Draft(d)
    first = split.fresh('p')
    split.kinds[first] = SingularKind(BOUNDARY_SADDLE, 1)
    split.ports[first] = x
    second = split.fresh('p')
    split.kinds[second] = SingularKind(BOUNDARY_SADDLE, 1)
    split.ports[second] = y
    split.replace_on_circle(pid, [first, second])
    split.relocate({(pid, 0): (first, 0), (pid, 1): (second, 0)})
    split.drop(pid)

    if opposite_port(x) == 'i':
        source = _trace(d, (pid, 0), -1, skip=(pid,))
        new_in = 0
    else:
        source = _trace(d, (pid, 1), 1, skip=(pid,))
        new_in = 3
    pushed = _Draft(d)
    pushed.replace_on_circle(pid, [])
    word = opposite_port(x) + x + y + opposite_port(y)
    shift = 0 if word[0] == 'i' else 1
    sid = pushed.add_saddle(word, {1: (pid, 0), 2: (pid, 1)})
    pushed.feeds[(sid, (new_in - shift) % 4)] = (source, None)
    pushed.drop(pid)
    return [split.diagram(), pushed.diagram()]


def _resolve_three_halves(d: FlowDiagram, qid: str) -> List[FlowDiagram]:
    x, y, z = d.port_words[qid]
    results = []

    for cut in (1, 2):
        draft = _Draft(d)
        left = draft.fresh('p')
        draft.kinds[left] = SingularKind(BOUNDARY_SADDLE, cut)
        draft.ports[left] = (x + y + z)[:cut]
        right = draft.fresh('p')
        draft.kinds[right] = SingularKind(BOUNDARY_SADDLE, 3 - cut)
        draft.ports[right] = (x + y + z)[cut:]
        draft.replace_on_circle(qid, [left, right])
        mapping = {(qid, j): (left, j) if j < cut else (right, j - cut) for j in range(3)}
        draft.relocate(mapping)
        draft.drop(qid)
        results.append(draft.diagram())

    draft = _Draft(d)
    anchor = draft.fresh('p')
    draft.kinds[anchor] = SingularKind(BOUNDARY_SADDLE, 1)
    draft.ports[anchor] = x
    draft.replace_on_circle(qid, [anchor])
    word = x + y + z + opposite_port(z)
    shift = 0 if word[0] == 'i' else 1
    sid = draft.add_saddle(word, {0: (qid, 0), 1: (qid, 1), 2: (qid, 2)})
    joint = (sid, (3 - shift) % 4)
    if x == 'o':
        draft.feeds[joint] = (anchor, 0)
    else:
        draft.feeds[(anchor, 0)] = joint
    draft.drop(qid)
    results.append(draft.diagram())
    return results


def resolution_moves(d: FlowDiagram, sig: ComponentSignature = ANNULUS) -> List[FlowDiagram]:
    """
    Diagrams reached by resolving exactly one degeneracy.

    Moves: break an interior separatrix to either side; split a pinching on
    its circle or push it off into an interior saddle; split a 3/2-boundary
    saddle into a boundary saddle and a pinching, or into an interior saddle
    joined to a boundary saddle. Outputs are valid, one codimension lower,
    and deduplicated.
    """
    level = codimension(d)
    if level == 0:
        return []

    produced: List[FlowDiagram] = []
    for out, into in sorted(d.target_map.items()):
        produced.extend(_break_separatrix(d, out, into))
    for sid, kind in d.singulars:
        if kind.tag == BOUNDARY_SADDLE and kind.k == 2:
            produced.extend(_resolve_pinching(d, sid))
        elif kind.tag == BOUNDARY_SADDLE and kind.k == 3:
            produced.extend(_resolve_three_halves(d, sid))

    unique: Dict[bytes, FlowDiagram] = {}
    for result in produced:
        report = validate(result, sig)
        if not report.passed:
            logger.debug(f"Dropping invalid move output: {report.rules()}")
            continue
        if codimension(result) != level - 1:
            logger.debug(f"Dropping move output of codimension {codimension(result)}")
            continue
        unique.setdefault(canonical_form(result), result)
    return [unique[key] for key in sorted(unique)]


def class_ids(classes: Dict[int, List[FlowDiagram]]) -> Dict[str, FlowDiagram]:
    """Element ids q<codim>_<n>, numbered from 1 in canonical-key order."""
    named: Dict[str, FlowDiagram] = {}
    for q in sorted(classes):
        ordered = sorted(classes[q], key=canonical_form)
        for n, d in enumerate(ordered, start=1):
            named[f"q{q}_{n}"] = d
    return named


def build_stratified_poset(classes: Dict[int, List[FlowDiagram]],
                           sig: ComponentSignature = ANNULUS) -> StratifiedPoset:
    """Order the classes by resolution; x < y when y is reached from x."""
    named = class_ids(classes)
    by_key = {canonical_form(d): ident for ident, d in named.items()}

    covers = []
    for ident, d in named.items():
        for result in resolution_moves(d, sig):
            key = canonical_form(result)
            if key not in by_key:
                raise StratificationError(
                    f"move from {ident} produced a class outside the enumeration "
                    f"(codim {codimension(result)}, {degeneracy_profile(result)})")
            covers.append((ident, by_key[key]))

    poset = build_poset(sorted(named), sorted(set(covers)))
    codim = {ident: codimension(d) for ident, d in named.items()}
    logger.info(f"Stratified poset: {len(poset)} elements, {len(poset.covers)} covers")
    return StratifiedPoset(poset, codim)


# text format

def format_diagram(d: FlowDiagram) -> str:
    lines = []
    for sid, kind in d.singulars:
        lines.append(f"singular {sid} {kind.label()}")
    for c, members in enumerate(d.circles):
        word = ' '.join(f"{sid}[{d.port_words[sid]}]" for sid in members)
        lines.append(f"boundary {c} {word}")
    for s in list(d.separatrices) + d.sink_separatrices():
        lines.append(f"sep {s.source}:{s.source_slot} -> {s.target}:{s.target_slot}")
    return '\n'.join(lines) + '\n'


def _parse_port(text: str, lineno: int) -> Port:
    owner, _, slot = text.partition(':')
    try:
        return owner, int(slot)
    except ValueError:
        raise DiagramFormatError(f"line {lineno}: bad port {text!r}, expected <id>:<slot>")


def parse_diagram(text: str) -> FlowDiagram:
    """
    Parse the line format

        singular <id> <kind>
        boundary <circle#> <id>[<ports>] ...
        sep <from>:<slot> -> <to>:<slot>
    """
    kinds: Dict[str, SingularKind] = {}
    ports: Dict[str, str] = {}
    circles: Dict[int, List[str]] = {}
    seps: List[Separatrix] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == 'singular' and len(parts) == 3:
            if parts[1] in kinds:
                raise DiagramFormatError(f"line {lineno}: duplicate singular {parts[1]}")
            try:
                kinds[parts[1]] = SingularKind.parse(parts[2])
            except DiagramFormatError as e:
                raise DiagramFormatError(f"line {lineno}: {e}")
        elif parts[0] == 'boundary' and len(parts) >= 3:
            try:
                c = int(parts[1])
            except ValueError:
                raise DiagramFormatError(f"line {lineno}: circle number expected, got {parts[1]!r}")
            members = []
            for item in parts[2:]:
                sid, _, rest = item.partition('[')
                if not rest.endswith(']'):
                    raise DiagramFormatError(f"line {lineno}: expected <id>[<ports>], got {item!r}")
                ports[sid] = rest[:-1]
                members.append(sid)
            circles[c] = members
        elif parts[0] == 'sep' and len(parts) == 4 and parts[2] == '->':
            (src, sslot), (tgt, tslot) = _parse_port(parts[1], lineno), _parse_port(parts[3], lineno)
            seps.append(Separatrix(src, sslot, tgt, tslot))
        else:
            raise DiagramFormatError(f"line {lineno}: cannot parse {line!r}")

    if sorted(circles) != list(range(len(circles))):
        raise DiagramFormatError(f"circles must be numbered 0..{len(circles) - 1}")
    for c, members in circles.items():
        for sid in members:
            if sid not in kinds or kinds[sid].tag != BOUNDARY_SADDLE:
                raise DiagramFormatError(f"boundary {c} lists {sid}, which is not a boundary_saddle")
            kinds[sid] = SingularKind(BOUNDARY_SADDLE, kinds[sid].k, c)
    for sid, kind in kinds.items():
        if kind.tag == SADDLE:
            ports[sid] = 'io' * (kind.k + 1)
        elif kind.tag == BOUNDARY_SADDLE and kind.circle is None:
            raise DiagramFormatError(f"boundary saddle {sid} lies on no circle")

    # sink ends are implied by the free out-ports; check them and drop them
    absorbed = [s for s in seps if s.target in kinds and kinds[s.target].tag == SINK]
    seps = [s for s in seps if s not in absorbed]
    feeding = {(s.source, s.source_slot) for s in seps}
    for s in absorbed:
        word = ports.get(s.source, '') if kinds.get(s.source, SingularKind(SINK)).is_multi_saddle else ''
        if not 0 <= s.source_slot < len(word) or word[s.source_slot] != 'o':
            raise DiagramFormatError(f"sink separatrix from {s.source}:{s.source_slot}, "
                                     "which is not an out-port of a multi-saddle")
        if (s.source, s.source_slot) in feeding:
            raise DiagramFormatError(f"out-port {s.source}:{s.source_slot} runs into the sink "
                                     "and into a saddle")
    return FlowDiagram(
        singulars=tuple(sorted(kinds.items())),
        ports=tuple(sorted(ports.items())),
        circles=tuple(tuple(circles[c]) for c in sorted(circles)),
        separatrices=tuple(sorted(seps)),
    )


def read_diagram(filepath: str) -> FlowDiagram:
    with open(filepath, 'r', encoding='ascii') as f:
        return parse_diagram(f.read())
