"""Labelled, aligned semantic graphs and source-annotated as-graphs."""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

SOURCES = ("S0", "S1", "S2")

COGS_EDGE_LABELS = frozenset(
    {"agent", "theme", "recipient", "xcomp", "ccomp", "iota", "nmod.op1", "nmod.op2"}
)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: int
    label: str | None = None
    alignment: int | None = None


@dataclass(frozen=True, order=True)
class Edge:
    source: int
    target: int
    label: str


class SemGraph:
    """A directed graph with node labels, edge labels, alignments and one root.

    Instances are treated as immutable; all operations build new graphs.
    """

    __slots__ = ("_nodes", "_edges", "_root", "_out", "_in")

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge], root: int):
        self._nodes = {}
        for n in nodes:
            if n.id in self._nodes:
                raise GraphError(f"duplicate node id {n.id}")
            self._nodes[n.id] = n
        self._edges = frozenset(edges)
        if root not in self._nodes:
            raise GraphError(f"root {root} is not a node")
        self._root = root
        self._out = defaultdict(list)
        self._in = defaultdict(list)
        for e in sorted(self._edges):
            if e.source not in self._nodes or e.target not in self._nodes:
                raise GraphError(f"edge {e} has a dangling endpoint")
            self._out[e.source].append(e)
            self._in[e.target].append(e)

    @property
    def nodes(self) -> Mapping[int, Node]:
        return self._nodes

    @property
    def edges(self) -> frozenset[Edge]:
        return self._edges

    @property
    def root(self) -> int:
        return self._root

    def node(self, node_id: int) -> Node:
        return self._nodes[node_id]

    def out_edges(self, node_id: int) -> list[Edge]:
        return self._out.get(node_id, [])

    def in_edges(self, node_id: int) -> list[Edge]:
        return self._in.get(node_id, [])

    def __len__(self):
        return len(self._nodes)

    def __eq__(self, other):
        if not isinstance(other, SemGraph):
            return NotImplemented
        return (self._nodes == other._nodes and self._edges == other._edges
                and self._root == other._root)

    def __hash__(self):
        return hash((frozenset(self._nodes.values()), self._edges, self._root))

    def __repr__(self):
        return f"SemGraph({len(self._nodes)} nodes, {len(self._edges)} edges, root={self._root})"

    def relabel_ids(self, offset: int) -> "SemGraph":
        return SemGraph(
            (Node(n.id + offset, n.label, n.alignment) for n in self._nodes.values()),
            (Edge(e.source + offset, e.target + offset, e.label) for e in self._edges),
            self._root + offset,
        )

    def dumps(self) -> str:
        return dump_graph(self)


# --- text format ----------------------------------------------------------
#
#   root <id>
#   node <id> <label|_> <alignment|_>
#   edge <source> <target> <label>


def dump_graph(g: SemGraph) -> str:
    lines = [f"root {g.root}"]
    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        label = "_" if n.label is None else n.label
        align = "_" if n.alignment is None else str(n.alignment)
        lines.append(f"node {n.id} {label} {align}")
    for e in sorted(g.edges):
        lines.append(f"edge {e.source} {e.target} {e.label}")
    return "\n".join(lines)


def load_graph(text: str) -> SemGraph:
    nodes, edges, root = [], [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "root":
                root = int(parts[1])
            elif parts[0] == "node":
                label = None if parts[2] == "_" else parts[2]
                align = None if parts[3] == "_" else int(parts[3])
                nodes.append(Node(int(parts[1]), label, align))
            elif parts[0] == "edge":
                edges.append(Edge(int(parts[1]), int(parts[2]), parts[3]))
            else:
                raise GraphError(f"line {lineno}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
    if root is None:
        raise GraphError("missing root record")
    return SemGraph(nodes, edges, root)


# --- isomorphism ----------------------------------------------------------

def _signature(g: SemGraph, nid: int):
    n = g.node(nid)
    return (
        n.label,
        n.alignment,
        nid == g.root,
        tuple(sorted(Counter(e.label for e in g.out_edges(nid)).items())),
        tuple(sorted(Counter(e.label for e in g.in_edges(nid)).items())),
    )


def isomorphic(g1: SemGraph, g2: SemGraph) -> bool:
    """True iff some bijection of node ids preserves labels, alignments,
    edges and the root.

    Nodes are bucketed by a local signature; in COGS graphs alignments make
    almost every bucket a singleton, so the backtracking below rarely
    branches.
    """
    if len(g1) != len(g2) or len(g1.edges) != len(g2.edges):
        return False
    buckets1, buckets2 = defaultdict(list), defaultdict(list)
    for nid in g1.nodes:
        buckets1[_signature(g1, nid)].append(nid)
    for nid in g2.nodes:
        buckets2[_signature(g2, nid)].append(nid)
    if {k: len(v) for k, v in buckets1.items()} != {k: len(v) for k, v in buckets2.items()}:
        return False

    order = sorted(g1.nodes, key=lambda nid: len(buckets1[_signature(g1, nid)]))
    edges2 = {(e.source, e.target, e.label) for e in g2.edges}
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(a: int, b: int) -> bool:
        for e in g1.out_edges(a):
            if e.target in mapping and (b, mapping[e.target], e.label) not in edges2:
                return False
        for e in g1.in_edges(a):
            if e.source in mapping and (mapping[e.source], b, e.label) not in edges2:
                return False
        if a in {e.target for e in g1.out_edges(a)}:
            for e in g1.out_edges(a):
                if e.target == a and (b, b, e.label) not in edges2:
                    return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in buckets2[_signature(g1, a)]:
            if b in used or not consistent(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if search(i + 1):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return search(0)


# --- AM types -------------------------------------------------------------

_TYPE_ITEM_RE = re.compile(r"\s*(S\d)\s*(\[)?")


class AmType:
    """A map from source names to request types (an empty map is ``{}``).

    Equality is structural.  The string form is ``{S0, S2[S0]}``.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[str, "AmType"] | Iterable[str] | None = None):
        if entries is None:
            items = {}
        elif isinstance(entries, Mapping):
            items = dict(entries)
        else:
            items = {s: EMPTY for s in entries}
        for s, req in items.items():
            if s not in SOURCES:
                raise GraphError(f"unknown source {s!r}")
            if not isinstance(req, AmType):
                raise GraphError(f"request of {s} must be an AmType")
        self._entries = tuple(sorted(items.items()))
        self._hash = hash(self._entries)

    @classmethod
    def parse(cls, text: str) -> "AmType":
        text = text.strip()
        t, rest = _parse_type(text, 0)
        if text[rest:].strip():
            raise GraphError(f"trailing text in type {text!r}")
        return t

    @property
    def sources(self) -> frozenset[str]:
        return frozenset(s for s, _ in self._entries)

    def request(self, source: str) -> "AmType":
        for s, req in self._entries:
            if s == source:
                return req
        raise KeyError(source)

    def items(self):
        return self._entries

    def without(self, *sources: str) -> "AmType":
        return AmType({s: r for s, r in self._entries if s not in sources})

    def restrict(self, sources: Iterable[str]) -> "AmType":
        keep = set(sources)
        return AmType({s: r for s, r in self._entries if s in keep})

    @property
    def depth(self) -> int:
        return 0 if not self._entries else 1 + max(r.depth for _, r in self._entries)

    def __contains__(self, source):
        return any(s == source for s, _ in self._entries)

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def __eq__(self, other):
        return isinstance(other, AmType) and self._entries == other._entries

    def __hash__(self):
        return self._hash

    def __str__(self):
        inner = ", ".join(s + (f"[{str(r)[1:-1]}]" if r else "") for s, r in self._entries)
        return "{" + inner + "}"

    __repr__ = __str__


def _parse_type(text: str, i: int) -> tuple[AmType, int]:
    # accepts "{...}" at the top level and bare "S0, S1[...]" lists inside brackets
    braced = text[i:].lstrip().startswith("{")
    if braced:
        i = text.index("{", i) + 1
    entries = {}
    closer = "}" if braced else "]"
    while True:
        j = i
        while j < len(text) and text[j].isspace():
            j += 1
        if j < len(text) and text[j] == closer:
            return AmType(entries), j + 1
        m = _TYPE_ITEM_RE.match(text, i)
        if m is None:
            raise GraphError(f"bad type syntax in {text!r}")
        src = m.group(1)
        i = m.end()
        if m.group(2):
            req, i = _parse_type(text, i)
        else:
            req = EMPTY
        entries[src] = req
        while i < len(text) and text[i].isspace():
            i += 1
        if i < len(text) and text[i] == ",":
            i += 1


EMPTY = AmType()


# --- as-graphs ------------------------------------------------------------

class AsGraph:
    """A SemGraph with source slots.

    ``slots`` maps every source the graph has ever carried to its node;
    ``filled`` lists the sources already consumed by Apply.  Keeping filled
    slots lets a later Apply with a request reach a node whose source was
    closed earlier, which makes evaluation independent of child order.
    """

    __slots__ = ("graph", "slots", "filled", "requests")

    def __init__(self, graph: SemGraph, slots: Mapping[str, int] | None = None,
                 requests: Mapping[str, AmType] | None = None,
                 filled: Iterable[str] = ()):
        self.graph = graph
        self.slots = dict(slots or {})
        self.filled = frozenset(filled)
        self.requests = {s: r for s, r in (requests or {}).items() if r}
        for s, nid in self.slots.items():
            if s not in SOURCES:
                raise GraphError(f"unknown source {s!r}")
            if nid not in graph.nodes:
                raise GraphError(f"source {s} points at missing node {nid}")
        if len(set(self.slots.values())) != len(self.slots):
            raise GraphError("source assignment is not injective")
        if not self.filled <= set(self.slots):
            raise GraphError("filled sources must be slots")
        for s, req in self.requests.items():
            if s not in self.slots:
                raise GraphError(f"request for missing source {s}")
            for r in req.sources:
                if r not in self.slots:
                    raise GraphError(f"request {s}[{r}] mentions a missing source")
                if r == s:
                    raise GraphError(f"source {s} requests itself")

    @property
    def root(self) -> int:
        return self.graph.root

    @property
    def open_sources(self) -> frozenset[str]:
        return frozenset(self.slots) - self.filled

    @property
    def type(self) -> AmType:
        return AmType({s: self.requests.get(s, EMPTY) for s in self.open_sources})

    def source_of(self, node_id: int) -> str | None:
        for s, nid in self.slots.items():
            if nid == node_id:
                return s
        return None

    def __repr__(self):
        return f"AsGraph({self.graph!r}, type={self.type})"


def type_of(g: AsGraph) -> AmType:
    return g.type
