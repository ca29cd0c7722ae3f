"""
Finite posets as finite T0-spaces.

A FinitePoset is stored by its covering relation (a, b), meaning a is covered
by b. The full order is recomputed on demand and cached; values are immutable
after construction. A StratifiedPoset adds a codimension label per element.
In the stratified spaces built by this project, x < y means x is the more
degenerate class, so codimension strictly decreases upward.
"""

import re
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import (Dict, FrozenSet, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Tuple, Union)

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from config import StrataConfig

logger = logging.getLogger(__name__)

NAME_PATTERN = re.compile(r"^[A-Za-z0-9_'!+-]+$")

Cover = Tuple[str, str]
LabeledId = Union[str, Tuple[str, str]]


class PosetError(Exception):
    """Base class for poset errors."""


class CycleError(PosetError):
    """The covering pairs contain a directed cycle."""


class UnknownElement(PosetError):
    """A pair or query references an undeclared element."""


class SizeLimit(PosetError):
    """Both posets exceed the isomorphism search bound."""


class PosetFormatError(PosetError):
    """Malformed poset text."""


class FinitePoset:
    """Immutable finite poset; the stored edges are exactly the covers."""

    def __init__(self, graph: nx.DiGraph):
        self._graph = nx.freeze(graph)
        self._up: Optional[Dict[str, FrozenSet[str]]] = None
        self._down: Optional[Dict[str, FrozenSet[str]]] = None

    @property
    def graph(self) -> nx.DiGraph:
        return self._graph

    @property
    def elements(self) -> FrozenSet[str]:
        return frozenset(self._graph.nodes)

    @property
    def covers(self) -> FrozenSet[Cover]:
        return frozenset(self._graph.edges)

    def display_name(self, x: str) -> str:
        self._require(x)
        return self._graph.nodes[x].get('name', x)

    def __contains__(self, x: object) -> bool:
        return x in self._graph

    def __len__(self) -> int:
        return self._graph.number_of_nodes()

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._graph.nodes))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and self.covers == other.covers

    def __hash__(self) -> int:
        return hash((self.elements, self.covers))

    def __repr__(self) -> str:
        return f"FinitePoset({len(self)} elements, {len(self.covers)} covers)"

    def _require(self, x: str):
        if x not in self._graph:
            raise UnknownElement(f"unknown element: {x}")

    def _closure(self):
        if self._up is None:
            self._up = {x: frozenset(nx.descendants(self._graph, x)) for x in self._graph}
            self._down = {x: frozenset(nx.ancestors(self._graph, x)) for x in self._graph}

    def strictly_above(self, x: str) -> FrozenSet[str]:
        self._require(x)
        self._closure()
        return self._up[x]

    def strictly_below(self, x: str) -> FrozenSet[str]:
        self._require(x)
        self._closure()
        return self._down[x]

    def upper_covers(self, x: str) -> FrozenSet[str]:
        self._require(x)
        return frozenset(self._graph.successors(x))

    def lower_covers(self, x: str) -> FrozenSet[str]:
        self._require(x)
        return frozenset(self._graph.predecessors(x))

    def leq(self, x: str, y: str) -> bool:
        return x == y or y in self.strictly_above(x)

    def order_pairs(self) -> FrozenSet[Cover]:
        """All strict pairs x < y."""
        self._closure()
        return frozenset((x, y) for x, ups in self._up.items() for y in ups)

    def induced(self, subset: Iterable[str]) -> 'FinitePoset':
        """Sub-poset carrying the restricted order."""
        keep = set(subset)
        for x in keep:
            self._require(x)
        pairs = [(x, y) for (x, y) in self.order_pairs() if x in keep and y in keep]
        labeled = [(x, self.display_name(x)) for x in sorted(keep)]
        return build_poset(labeled, pairs)

    def height(self, x: str) -> int:
        """Length of the longest chain ending at x."""
        below = self.strictly_below(x)
        if not below:
            return 0
        return 1 + max(self.height(y) for y in self.lower_covers(x))


@dataclass(frozen=True)
class StratifiedPoset:
    """A finite poset with a codimension label per element."""

    poset: FinitePoset
    codim: Mapping[str, int]

    def __post_init__(self):
        missing = self.poset.elements - set(self.codim)
        if missing:
            raise UnknownElement(f"codimension missing for: {', '.join(sorted(missing))}")
        extra = set(self.codim) - self.poset.elements
        if extra:
            raise UnknownElement(f"codimension given for undeclared: {', '.join(sorted(extra))}")
        object.__setattr__(self, 'codim', MappingProxyType(dict(self.codim)))

    def stratum(self, q: int) -> FrozenSet[str]:
        return frozenset(x for x, c in self.codim.items() if c == q)

    def strata_sizes(self) -> Dict[int, int]:
        sizes: Dict[int, int] = {}
        for c in self.codim.values():
            sizes[c] = sizes.get(c, 0) + 1
        return dict(sorted(sizes.items()))


@dataclass
class CellComplexReport:
    """Outcome of check_cell_complex."""

    violations: List[Cover] = field(default_factory=list)
    closure_failures: List[int] = field(default_factory=list)
    non_unit_covers: List[Cover] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.closure_failures

    @property
    def graded(self) -> bool:
        return not self.non_unit_covers


def build_poset(elements: Iterable[LabeledId], covers: Iterable[Cover]) -> FinitePoset:
    """
    Validate elements and covering pairs and return the poset.

    Elements are ids or (id, display_name) pairs. Pairs implied by other
    pairs are dropped (transitive reduction).
    """
    graph = nx.DiGraph()
    for item in elements:
        if isinstance(item, tuple):
            ident, name = item
        else:
            ident, name = item, item
        graph.add_node(ident, name=name)

    for a, b in covers:
        for x in (a, b):
            if x not in graph:
                raise UnknownElement(f"pair ({a}, {b}) references undeclared element {x}")
        if a == b:
            raise CycleError(f"element {a} is related to itself")
        graph.add_edge(a, b)

    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        raise CycleError(f"covers contain a cycle: {' -> '.join(a for a, _ in cycle)}")

    reduced = nx.transitive_reduction(graph)
    reduced.add_nodes_from(graph.nodes(data=True))
    return FinitePoset(reduced)


def relatives(p: FinitePoset, x: str, direction: str, strict: bool = False) -> FrozenSet[str]:
    """Up-set or down-set of x; the strict variant excludes x."""
    if direction == 'up':
        found = p.strictly_above(x)
    elif direction == 'down':
        found = p.strictly_below(x)
    else:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    return found if strict else found | {x}


def opposite(p: FinitePoset) -> FinitePoset:
    """The same elements with the order reversed."""
    labeled = [(x, p.display_name(x)) for x in p]
    return build_poset(labeled, [(b, a) for (a, b) in p.covers])


def check_cell_complex(sp: StratifiedPoset) -> CellComplexReport:
    """
    Check the abstract cell complex law and the closure law.

    Law: x < y implies codim(x) > codim(y). Closure: for every q, the
    down-closure of the codim-(q+1) stratum is exactly the union of the
    strata of codimension at least q+1.
    """
    p, codim = sp.poset, sp.codim
    report = CellComplexReport()

    for x, y in sorted(p.order_pairs()):
        if codim[x] <= codim[y]:
            report.violations.append((x, y))

    for a, b in sorted(p.covers):
        if codim[a] - codim[b] != 1:
            report.non_unit_covers.append((a, b))

    top = max(codim.values(), default=-1)
    for q in range(-1, top):
        stratum = sp.stratum(q + 1)
        closure = set()
        for x in stratum:
            closure |= relatives(p, x, 'down')
        expected = {x for x, c in codim.items() if c >= q + 1}
        if closure != expected:
            report.closure_failures.append(q)

    if not report.passed:
        logger.warning(f"Cell complex check failed: {len(report.violations)} order violations, "
                       f"closure failures at q={report.closure_failures}")
    return report


def _invariants(p: FinitePoset) -> List[Tuple[int, int, int]]:
    return sorted((len(p.lower_covers(x)), len(p.upper_covers(x)), p.height(x)) for x in p)


def isomorphic(p: FinitePoset, q: FinitePoset,
               bound: Optional[int] = None) -> Optional[Dict[str, str]]:
    """
    Return an order isomorphism p -> q, or None when there is none.

    Cover-degree and height profiles prune first; VF2 backtracking on the
    Hasse diagrams does the rest. Deterministic for fixed inputs.
    """
    if bound is None:
        bound = StrataConfig.ISO_SEARCH_BOUND
    if len(p) > bound and len(q) > bound:
        raise SizeLimit(f"both posets exceed the isomorphism bound {bound} ({len(p)}, {len(q)})")

    if len(p) != len(q) or len(p.covers) != len(q.covers):
        return None
    if _invariants(p) != _invariants(q):
        return None

    g1, g2 = nx.DiGraph(), nx.DiGraph()
    g1.add_nodes_from(sorted(p.elements))
    g1.add_edges_from(sorted(p.covers))
    g2.add_nodes_from(sorted(q.elements))
    g2.add_edges_from(sorted(q.covers))
    matcher = DiGraphMatcher(g1, g2)
    mapping = next(matcher.isomorphisms_iter(), None)
    return dict(sorted(mapping.items())) if mapping is not None else None


def parse_poset(text: str) -> Union[FinitePoset, StratifiedPoset]:
    """
    Parse the line format

        elem <name> [codim=<int>]
        cover <name_a> <name_b>

    Returns a StratifiedPoset when every element carries a codim, a plain
    FinitePoset when none does.
    """
    elements: List[str] = []
    codim: Dict[str, int] = {}
    covers: List[Cover] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        directive = parts[0]

        if directive == 'elem':
            if len(parts) not in (2, 3):
                raise PosetFormatError(f"line {lineno}: expected 'elem <name> [codim=<int>]'")
            name = parts[1]
            if not NAME_PATTERN.match(name):
                raise PosetFormatError(f"line {lineno}: invalid element name {name!r}")
            if name in elements:
                raise PosetFormatError(f"line {lineno}: duplicate element {name}")
            elements.append(name)
            if len(parts) == 3:
                key, _, value = parts[2].partition('=')
                if key != 'codim':
                    raise PosetFormatError(f"line {lineno}: unknown attribute {key!r}")
                try:
                    codim[name] = int(value)
                except ValueError:
                    raise PosetFormatError(f"line {lineno}: codim must be an integer, got {value!r}")
                if codim[name] < 0:
                    raise PosetFormatError(f"line {lineno}: codim must be non-negative")
        elif directive == 'cover':
            if len(parts) != 3:
                raise PosetFormatError(f"line {lineno}: expected 'cover <name_a> <name_b>'")
            covers.append((parts[1], parts[2]))
        else:
            raise PosetFormatError(f"line {lineno}: unknown directive {directive!r}")

    try:
        poset = build_poset(elements, covers)
    except UnknownElement as e:
        raise PosetFormatError(str(e))

    if not codim:
        return poset
    if len(codim) != len(elements):
        raise PosetFormatError("codim must be given for every element or for none")
    return StratifiedPoset(poset, codim)


def read_poset(filepath: str) -> Union[FinitePoset, StratifiedPoset]:
    with open(filepath, 'r', encoding='ascii') as f:
        return parse_poset(f.read())


def _split(p: Union[FinitePoset, StratifiedPoset]) -> Tuple[FinitePoset, Optional[Mapping[str, int]]]:
    if isinstance(p, StratifiedPoset):
        return p.poset, p.codim
    return p, None


def format_poset(p: Union[FinitePoset, StratifiedPoset]) -> str:
    """Deterministic text form; parse_poset(format_poset(p)) == p."""
    poset, codim = _split(p)
    lines = []
    for x in sorted(poset.elements, key=lambda e: (codim[e] if codim else 0, e)):
        lines.append(f"elem {x} codim={codim[x]}" if codim else f"elem {x}")
    for a, b in sorted(poset.covers):
        lines.append(f"cover {a} {b}")
    return '\n'.join(lines) + '\n'


def to_dot(p: Union[FinitePoset, StratifiedPoset], title: str = 'poset') -> str:
    """DOT Hasse diagram; edges point from the lower element to the higher."""
    poset, codim = _split(p)
    lines = [f'digraph "{title}" {{', '  rankdir=BT;', '  node [shape=box];']
    if codim:
        for q in sorted(set(codim.values()), reverse=True):
            members = ' '.join(f'"{x}"' for x in sorted(poset.elements) if codim[x] == q)
            lines.append(f'  {{ rank=same; {members} }}  // codim {q}')
    for x in sorted(poset.elements):
        label = poset.display_name(x)
        if codim:
            label = f"{label}\\ncodim {codim[x]}"
        lines.append(f'  "{x}" [label="{label}"];')
    for a, b in sorted(poset.covers):
        lines.append(f'  "{a}" -> "{b}";')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def chain(names: Sequence[str]) -> FinitePoset:
    """Convenience: the chain names[0] < names[1] < ..."""
    return build_poset(list(names), list(zip(names, names[1:])))
