"""Apply and Modify over as-graphs, supertag shapes, and AM dependency trees."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import EMPTY, SOURCES, AmType, AsGraph, Edge, GraphError, Node, SemGraph

APP, MOD = "APP", "MOD"


class AlgebraError(ValueError):
    pass


class NoSuchSource(AlgebraError):
    pass


class TypeClash(AlgebraError):
    pass


class LabelClash(AlgebraError):
    pass


class ModifierWithOpenSources(AlgebraError):
    pass


class IllTyped(AlgebraError):
    def __init__(self, edge, cause: Exception):
        super().__init__(f"edge {edge}: {cause}")
        self.edge = edge
        self.cause = cause


class NonEmptyRootType(AlgebraError):
    pass


class TreeError(AlgebraError):
    pass


@dataclass(frozen=True, order=True)
class Op:
    kind: str
    source: str

    def __post_init__(self):
        if self.kind not in (APP, MOD):
            raise ValueError(f"unknown operation {self.kind!r}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")

    def __str__(self):
        return f"{self.kind}_{self.source}"

    @classmethod
    def parse(cls, text: str) -> "Op":
        kind, _, src = text.partition("_")
        return cls(kind, src)


ALL_OPS = tuple(Op(k, s) for k in (APP, MOD) for s in SOURCES)


# --- merging --------------------------------------------------------------

def _merge(head: AsGraph, other: AsGraph, pairs: list[tuple[int, int]]):
    """Disjoint union of two graphs followed by merging node pairs
    ``(head node, other node)``.  Returns the merged SemGraph and the id maps
    for both operands."""
    offset = max(head.graph.nodes) + 1 - min(other.graph.nodes)
    parent: dict[int, int] = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b + offset)
        if ra != rb:
            lo, hi = min(ra, rb), max(ra, rb)
            parent[hi] = lo

    nodes: dict[int, Node] = {}
    for n in list(head.graph.nodes.values()) + [
            Node(n.id + offset, n.label, n.alignment) for n in other.graph.nodes.values()]:
        r = find(n.id)
        if r not in nodes:
            nodes[r] = Node(r, n.label, n.alignment)
            continue
        old = nodes[r]
        if old.label is not None and n.label is not None:
            raise LabelClash(f"cannot merge labelled nodes {old.label!r} and {n.label!r}")
        if old.alignment is not None and n.alignment is not None and old.alignment != n.alignment:
            raise LabelClash(f"cannot merge nodes aligned to {old.alignment} and {n.alignment}")
        nodes[r] = Node(r, old.label if old.label is not None else n.label,
                        old.alignment if old.alignment is not None else n.alignment)
    edges = {Edge(find(e.source), find(e.target), e.label) for e in head.graph.edges}
    edges |= {Edge(find(e.source + offset), find(e.target + offset), e.label)
              for e in other.graph.edges}
    graph = SemGraph(nodes.values(), edges, find(head.root))
    return graph, (lambda x: find(x)), (lambda x: find(x + offset))


def apply(head: AsGraph, s: str, arg: AsGraph) -> AsGraph:
    """Fill open source ``s`` of ``head`` with the root of ``arg``.

    ``arg``'s type must equal the request at ``s``; each requested source
    of ``arg`` is merged with the same-named slot of ``head``, even when
    that slot was already filled.
    """
    if s not in head.open_sources:
        raise NoSuchSource(f"head has no open source {s} (type {head.type})")
    req = head.type.request(s)
    if arg.type != req:
        raise TypeClash(f"argument type {arg.type} does not match request {s}{req}")
    pairs = [(head.slots[s], arg.root)]
    pairs += [(head.slots[r], arg.slots[r]) for r in req.sources]
    graph, hmap, _ = _merge(head, arg, pairs)
    return AsGraph(graph, {x: hmap(n) for x, n in head.slots.items()}, head.requests,
                   head.filled | {s})


def modify(head: AsGraph, s: str, mod: AsGraph) -> AsGraph:
    """Attach ``mod`` to the root of ``head`` through ``mod``'s source ``s``."""
    if s not in mod.open_sources:
        raise NoSuchSource(f"modifier has no open source {s} (type {mod.type})")
    if mod.type.request(s):
        raise TypeClash(f"modifier source {s} carries a request")
    if mod.open_sources - {s}:
        raise ModifierWithOpenSources(f"modifier type {mod.type} has sources besides {s}")
    graph, hmap, _ = _merge(head, mod, [(head.root, mod.slots[s])])
    return AsGraph(graph, {x: hmap(n) for x, n in head.slots.items()}, head.requests,
                   head.filled)


def combine(head: AsGraph, op: Op, dep: AsGraph) -> AsGraph:
    if op.kind == APP:
        return apply(head, op.source, dep)
    return modify(head, op.source, dep)


# --- supertag shapes ------------------------------------------------------

_KEY_RE = re.compile(r"^\[(?P<edges>[^\]]*)\](?P<type>\{.*\})$")


@dataclass(frozen=True)
class Supertag:
    """Delexicalised constant: a labelled root with edges to placeholder
    slots, plus the requests of those slots.

    The key form is ``[agent>S0 xcomp>S2]{S0, S2[S0]}``.
    """

    edges: tuple[tuple[str, str], ...] = ()
    requests: tuple[tuple[str, AmType], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(tuple(e) for e in self.edges)))
        reqs = dict(self.requests)
        object.__setattr__(self, "requests", tuple(sorted((s, r) for s, r in reqs.items() if r)))
        srcs = [s for _, s in self.edges]
        if len(set(srcs)) != len(srcs):
            raise GraphError(f"supertag reuses a source: {self.edges}")
        for s, r in self.requests:
            if s not in srcs or not r.sources <= set(srcs) or s in r.sources:
                raise GraphError(f"bad request {s}{r} in supertag {self.edges}")

    @property
    def type(self) -> AmType:
        reqs = dict(self.requests)
        return AmType({s: reqs.get(s, EMPTY) for _, s in self.edges})

    @property
    def key(self) -> str:
        return "[" + " ".join(f"{lab}>{s}" for lab, s in self.edges) + "]" + str(self.type)

    def __str__(self):
        return self.key

    @classmethod
    def parse(cls, key: str) -> "Supertag":
        m = _KEY_RE.match(key.strip())
        if m is None:
            raise GraphError(f"bad supertag key {key!r}")
        edges = [tuple(part.split(">")) for part in m.group("edges").split()]
        t = AmType.parse(m.group("type"))
        if t.sources != {s for _, s in edges}:
            raise GraphError(f"type and edges disagree in {key!r}")
        return cls(tuple(edges), tuple(t.items()))

    def instantiate(self, label: str, token: int, id_offset: int = 0) -> AsGraph:
        root = id_offset
        nodes = [Node(root, label, token)]
        edges, slots = [], {}
        for k, (lab, s) in enumerate(self.edges, 1):
            nodes.append(Node(root + k))
            edges.append(Edge(root, root + k, lab))
            slots[s] = root + k
        return AsGraph(SemGraph(nodes, edges, root), slots, dict(self.requests))


def supertag_of(g: AsGraph) -> Supertag:
    """Shape of a constant whose placeholders hang directly off its root."""
    edges = []
    for s, nid in g.slots.items():
        inc = [e for e in g.graph.in_edges(nid)]
        if len(inc) != 1 or inc[0].source != g.root:
            raise GraphError(f"slot {s} is not a direct child of the root")
        edges.append((inc[0].label, s))
    if len(g.graph.nodes) != 1 + len(g.slots):
        raise GraphError("constant has unlabelled non-slot nodes")
    return Supertag(tuple(edges), tuple(g.requests.items()))


# --- dependency trees -----------------------------------------------------

@dataclass(frozen=True, order=True)
class TreeEdge:
    head: int
    dep: int
    op: Op

    def __str__(self):
        return f"{self.head} {self.dep} {self.op.kind} {self.op.source}"


@dataclass
class AmDepTree:
    """One constant (or None for the ⊥ tag) per token plus operation edges."""

    constants: list[AsGraph | None]
    edges: list[TreeEdge] = field(default_factory=list)

    def __post_init__(self):
        self.edges = sorted(self.edges)
        n = len(self.constants)
        active = {i for i, c in enumerate(self.constants) if c is not None}
        if not active:
            raise TreeError("tree has no non-bottom tokens")
        parents: dict[int, int] = {}
        seen_app = set()
        for e in self.edges:
            if not (0 <= e.head < n and 0 <= e.dep < n):
                raise TreeError(f"edge {e} out of range")
            if e.head not in active or e.dep not in active:
                raise TreeError(f"edge {e} touches a bottom token")
            if e.dep in parents:
                raise TreeError(f"token {e.dep} has two heads")
            parents[e.dep] = e.head
            if e.op.kind == APP:
                if (e.head, e.op.source) in seen_app:
                    raise TreeError(f"token {e.head} applies {e.op.source} twice")
                seen_app.add((e.head, e.op.source))
        roots = active - set(parents)
        if len(roots) != 1:
            raise TreeError(f"{len(roots)} roots")
        self.root = roots.pop()
        for t in active:
            steps, x = 0, t
            while x != self.root:
                x = parents[x]
                steps += 1
                if steps > n:
                    raise TreeError("cycle in dependency tree")
        self._parents = parents

    def __len__(self):
        return len(self.constants)

    def children(self, h: int) -> list[TreeEdge]:
        return [e for e in self.edges if e.head == h]

    def parent(self, t: int) -> int | None:
        return self._parents.get(t)

    def is_projective(self) -> bool:
        for e in self.edges:
            lo, hi = sorted((e.head, e.dep))
            for t in range(lo + 1, hi):
                if self.constants[t] is None:
                    continue
                x = t
                while x != e.head and x != self.root:
                    x = self._parents[x]
                if x != e.head:
                    return False
        return True

    def sources_used(self) -> set[str]:
        used = set()
        for c in self.constants:
            if c is not None:
                used |= set(c.slots)
        return used

    def dumps(self) -> str:
        return "\n".join(str(e) for e in self.edges)


def evaluate(tree: AmDepTree, child_order=None) -> SemGraph:
    """Evaluate bottom-up.  ``child_order`` may be a callable that receives
    the list of child edges of a head and returns them in the order to use."""
    value = _evaluate(tree, tree.root, child_order)
    if value.type:
        raise NonEmptyRootType(f"root type is {value.type}")
    return value.graph


def evaluate_as_graph(tree: AmDepTree, child_order=None) -> AsGraph:
    return _evaluate(tree, tree.root, child_order)


def _evaluate(tree: AmDepTree, h: int, child_order) -> AsGraph:
    result = tree.constants[h]
    kids = tree.children(h)
    if child_order is not None:
        kids = list(child_order(kids))
    for e in kids:
        dep_value = _evaluate(tree, e.dep, child_order)
        try:
            result = combine(result, e.op, dep_value)
        except IllTyped:
            raise
        except (AlgebraError, GraphError) as exc:
            raise IllTyped(e, exc) from exc
    return result


def load_tree_edges(text: str) -> list[TreeEdge]:
    edges = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise TreeError(f"bad tree edge line {line!r}")
        edges.append(TreeEdge(int(parts[0]), int(parts[1]), Op(parts[2], parts[3])))
    return edges


def tree_from_supertags(tags: Sequence[Supertag | None], labels: Sequence[str | None],
                        edges: Iterable[TreeEdge]) -> AmDepTree:
    constants = []
    offset = 0
    for i, (tag, lab) in enumerate(zip(tags, labels)):
        if tag is None:
            constants.append(None)
            continue
        constants.append(tag.instantiate(lab, i, offset))
        offset += 1 + len(tag.edges)
    return AmDepTree(constants, list(edges))
