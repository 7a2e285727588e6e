"""Logical form <-> graph conversion for COGS.

Forward direction: one node per variable and proper name, lemmas moved
onto nodes, binary predicates become edges, iota terms become a ``the``
node with an ``iota`` edge, and ``noun.nmod.P(x, y)`` becomes a reified
``P`` node with ``nmod.op1``/``nmod.op2`` edges.  The backward direction
undoes this and restores the canonical conjunct order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graph import EMPTY, SOURCES, AsGraph, Edge, GraphError, Node, SemGraph
from .lf import Arg, LfError, LogicalForm, Term, canonical_order

DETERMINER = "the"
IOTA = "iota"
OP1, OP2 = "nmod.op1", "nmod.op2"

# canonical source for the slot reached by an edge with this label
CANONICAL_SOURCE = {
    "agent": "S0",
    "theme": "S1",
    "recipient": "S2",
    "xcomp": "S2",
    "ccomp": "S2",
    OP1: "S0",
    OP2: "S1",
    IOTA: "S0",
}

# role order used when printing primitives
_PRIMITIVE_ROLE_ORDER = ("agent", "recipient", "theme", "xcomp", "ccomp")


class ConversionError(ValueError):
    pass


class RootAmbiguity(ConversionError):
    pass


class UnknownToken(ConversionError):
    pass


class AlignmentError(ConversionError):
    pass


class MalformedGraph(ConversionError):
    pass


class NotAPrimitive(ConversionError):
    pass


@dataclass(frozen=True)
class AlignedGraph:
    graph: SemGraph
    token_count: int

    @property
    def complete(self) -> bool:
        return all(
            n.alignment is not None and 0 <= n.alignment < self.token_count
            for n in self.graph.nodes.values() if n.label is not None
        )


def is_proper_name(label: str | None) -> bool:
    # COGS lemmas are lower case; proper names are capitalised
    return bool(label) and label[0].isupper()


def lf_to_graph(lf: LogicalForm, sentence: list[str], check_surface: bool = True) -> AlignedGraph:
    if lf.is_primitive:
        raise ConversionError("lf_to_graph expects a non-primitive formula")
    n_tok = len(sentence)

    names: dict[str, int] = {}
    for t in lf.terms:
        for a in t.args:
            if a.is_name and a.value not in names:
                hits = [i for i, tok in enumerate(sentence) if tok == a.value]
                if not hits:
                    raise UnknownToken(f"proper name {a.value!r} not in sentence")
                if len(hits) > 1:
                    raise AlignmentError(f"proper name {a.value!r} occurs {len(hits)} times")
                names[a.value] = hits[0]

    labels: dict[int, str] = {}     # alignment -> label
    node_of: dict[tuple, int] = {}  # ('x', i) / ('n', name) -> node id
    extra: list[Node] = []
    edges: list[Edge] = []
    ids = itertools.count()

    def node_for(arg: Arg) -> int:
        key = ("x", arg.value) if arg.is_var else ("n", arg.value)
        if key not in node_of:
            node_of[key] = next(ids)
        return node_of[key]

    def set_label(arg: Arg, label: str):
        if not arg.is_var:
            raise ConversionError(f"cannot attach lemma {label!r} to {arg.value!r}")
        old = labels.setdefault(arg.value, label)
        if old != label:
            raise ConversionError(f"x_{arg.value} labelled both {old!r} and {label!r}")

    prep_nodes, det_nodes = set(), set()
    for t in lf.iota:
        x = t.args[0]
        set_label(x, t.lemma)
        d = next(ids)
        extra.append(Node(d, DETERMINER, x.value - 1))
        det_nodes.add(d)
        edges.append(Edge(d, node_for(x), IOTA))
    for t in lf.conjuncts:
        x = t.args[0]
        set_label(x, t.lemma)
        u = node_for(x)
        if t.is_unary:
            continue
        v = node_for(t.args[1])
        if t.is_nmod:
            p = next(ids)
            extra.append(Node(p, t.predicate[2], x.value + 1))
            prep_nodes.add(p)
            edges.append(Edge(p, u, OP1))
            edges.append(Edge(p, v, OP2))
        elif len(t.predicate) == 2:
            edges.append(Edge(u, v, t.predicate[1]))
        else:
            raise ConversionError(f"unsupported predicate {'.'.join(t.predicate)}")

    nodes = list(extra)
    for (kind, val), nid in node_of.items():
        if kind == "x":
            if val not in labels:
                raise ConversionError(f"x_{val} never receives a lemma")
            nodes.append(Node(nid, labels[val], val))
        else:
            nodes.append(Node(nid, val, names[val]))

    per_token: dict[int, int] = {}
    for n in nodes:
        if n.alignment is None or not 0 <= n.alignment < n_tok:
            raise AlignmentError(f"node {n.label!r} aligned to {n.alignment}, "
                                 f"outside a sentence of {n_tok} tokens")
        per_token[n.alignment] = per_token.get(n.alignment, 0) + 1
        if per_token[n.alignment] > 2:
            raise AlignmentError(f"more than two nodes aligned to token {n.alignment}")
        if check_surface and (n.id in prep_nodes or n.id in det_nodes):
            if sentence[n.alignment].lower() != n.label:
                raise AlignmentError(f"{n.label!r} node aligned to token "
                                     f"{sentence[n.alignment]!r}")

    has_incoming = {e.target for e in edges}
    candidates = [n.id for n in nodes
                  if n.id not in has_incoming and n.id not in prep_nodes and n.id not in det_nodes]
    if len(candidates) != 1:
        raise RootAmbiguity(f"{len(candidates)} root candidates")
    return AlignedGraph(SemGraph(nodes, edges, candidates[0]), n_tok)


def _arg_for(node: Node) -> Arg:
    if node.alignment is None:
        raise MalformedGraph(f"node {node.id} ({node.label}) has no alignment")
    if is_proper_name(node.label):
        return Arg.name(node.label, node.alignment)
    return Arg.var(node.alignment)


def graph_to_lf(g: AlignedGraph | SemGraph, sentence: list[str] | None = None) -> LogicalForm:
    """Invert :func:`lf_to_graph` and put the result in canonical order."""
    graph = g.graph if isinstance(g, AlignedGraph) else g
    iota: list[Term] = []
    conjuncts: list[Term] = []
    definite = set()
    for n in graph.nodes.values():
        if any(e.label == IOTA for e in graph.out_edges(n.id)):
            out = graph.out_edges(n.id)
            if len(out) != 1:
                raise MalformedGraph(f"determiner node {n.id} has {len(out)} outgoing edges")
            definite.add(out[0].target)
    try:
        for n in sorted(graph.nodes.values(), key=lambda n: n.id):
            out = graph.out_edges(n.id)
            out_labels = [e.label for e in out]
            if IOTA in out_labels:
                continue
            if n.label is None:
                raise MalformedGraph(f"node {n.id} is unlabelled")
            if OP1 in out_labels or OP2 in out_labels:
                if sorted(out_labels) != [OP1, OP2]:
                    raise MalformedGraph(f"preposition node {n.id} has edges {out_labels}")
                head = graph.node(next(e.target for e in out if e.label == OP1))
                obj = graph.node(next(e.target for e in out if e.label == OP2))
                if head.label is None:
                    raise MalformedGraph(f"preposition {n.label!r} modifies an unlabelled node")
                conjuncts.append(Term((head.label, "nmod", n.label), (_arg_for(head), _arg_for(obj))))
            elif out:
                for e in out:
                    conjuncts.append(Term((n.label, e.label),
                                          (_arg_for(n), _arg_for(graph.node(e.target)))))
            elif not is_proper_name(n.label):
                term = Term((n.label,), (_arg_for(n),))
                (iota if n.id in definite else conjuncts).append(term)
        return canonical_order(LogicalForm(iota, conjuncts))
    except LfError as exc:
        raise MalformedGraph(str(exc)) from exc


# --- primitives -----------------------------------------------------------

def _assign_sources(labels: list[str]) -> list[str]:
    """Canonical sources per edge label; a taken source falls back to the
    lowest free one."""
    used: list[str] = []
    for lab in labels:
        s = CANONICAL_SOURCE.get(lab, "S0")
        if s in used:
            free = [x for x in SOURCES if x not in used]
            if not free:
                raise ConversionError("more than three open slots")
            s = free[0]
        used.append(s)
    return used


def primitive_to_graph(lf: LogicalForm) -> AsGraph:
    """Graph of a primitive (one-word training item), possibly with open
    sources beyond the root."""
    if lf.constant is not None:
        return AsGraph(SemGraph([Node(0, lf.constant, 0)], [], 0))
    if lf.lambdas is None:
        raise NotAPrimitive("formula has no lambda prefix")
    if len(lf.lambdas) > 3:
        raise NotAPrimitive(f"{len(lf.lambdas)} lambda variables")
    events = [v for v in lf.lambdas if all(t.args[0].value == v for t in lf.conjuncts)]
    if len(events) != 1:
        raise NotAPrimitive("no unique event variable")
    event = events[0]
    lemmas = {t.lemma for t in lf.conjuncts}
    if len(lemmas) != 1:
        raise NotAPrimitive(f"primitive mixes lemmas {sorted(lemmas)}")
    ids = {v: i for i, v in enumerate(sorted(lf.lambdas, key=lambda v: v != event))}
    nodes = [Node(ids[event], lemmas.pop(), 0)]
    edges, edge_labels, targets = [], [], []
    for t in lf.conjuncts:
        if t.is_unary:
            continue
        if len(t.predicate) != 2:
            raise NotAPrimitive(f"unsupported primitive predicate {t}")
        tgt = t.args[1].value
        edges.append(Edge(ids[event], ids[tgt], t.predicate[1]))
        edge_labels.append(t.predicate[1])
        targets.append(tgt)
    unused = set(lf.lambdas) - set(targets) - {event}
    if unused:
        raise NotAPrimitive(f"unused lambda variables {sorted(unused)}")
    if len(set(targets)) != len(targets):
        raise NotAPrimitive("a lambda variable fills two roles")
    nodes.extend(Node(ids[v]) for v in targets)
    srcs = _assign_sources(edge_labels)
    return AsGraph(SemGraph(nodes, edges, ids[event]),
                   {s: ids[v] for s, v in zip(srcs, targets)})


def source_assignments(g: AsGraph):
    """All injective renamings of the open placeholder sources of ``g``."""
    placeholders = [g.slots[s] for s in sorted(g.slots)]
    for names in itertools.permutations(SOURCES, len(placeholders)):
        yield AsGraph(g.graph, dict(zip(names, placeholders)))


def primitive_graph_to_lf(g: AsGraph) -> LogicalForm:
    """Print a primitive graph in the dataset's lambda convention: roles in a
    fixed order, argument variables named from ``a`` upward starting with the
    last conjunct, the event called ``e``."""
    graph = g.graph
    root = graph.node(graph.root)
    out = graph.out_edges(root.id)
    if not out:
        if is_proper_name(root.label):
            return LogicalForm(lambdas=None, constant=root.label)
        return LogicalForm(conjuncts=(Term((root.label,), (Arg.lam("a"),)),), lambdas=("a",))
    try:
        out = sorted(out, key=lambda e: _PRIMITIVE_ROLE_ORDER.index(e.label))
    except ValueError as exc:
        raise MalformedGraph(f"unexpected primitive role in {[e.label for e in out]}") from exc
    if len(out) > 2:
        raise MalformedGraph("primitive with more than two argument slots")
    names = {e.target: n for e, n in zip(reversed(out), ("a", "b"))}
    terms = tuple(Term((root.label, e.label), (Arg.lam("e"), Arg.lam(names[e.target])))
                  for e in out)
    lambdas = tuple(sorted(names.values())) + ("e",)
    return LogicalForm(conjuncts=terms, lambdas=lambdas)


def round_trip(lf: LogicalForm, sentence: list[str]) -> LogicalForm:
    """graph_to_lf(lf_to_graph(lf)), or the primitive analogue."""
    if lf.is_primitive:
        return primitive_graph_to_lf(primitive_to_graph(lf))
    return graph_to_lf(lf_to_graph(lf, sentence), sentence)


def expected_node_count(lf: LogicalForm) -> int:
    args = {(a.kind, a.value) for t in lf.terms for a in t.args}
    return len(args) + len(lf.iota) + sum(t.is_nmod for t in lf.conjuncts)


__all__ = [
    "AlignedGraph", "ConversionError", "RootAmbiguity", "UnknownToken", "AlignmentError",
    "MalformedGraph", "NotAPrimitive", "CANONICAL_SOURCE", "lf_to_graph", "graph_to_lf",
    "primitive_to_graph", "primitive_graph_to_lf", "source_assignments", "round_trip",
    "is_proper_name", "expected_node_count", "EMPTY", "GraphError",
]
