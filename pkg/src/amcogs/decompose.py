"""Deterministic decomposition of aligned graphs into AM dependency trees.

Every node owns the edges leaving it (its blob).  A token's constant is
its node plus the blob, with each edge target replaced by a placeholder
named by a fixed label->source table.  ``iota`` and ``nmod.op1`` edges
turn into Modify edges from the modified noun to the modifier token; all
other edges become Apply edges.  A node with several argument parents
(control) is attached only to the parent that dominates the others; the
other parents keep a matching open source and the controller's Apply
edge carries the request.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .algebra import APP, MOD, AmDepTree, Op, Supertag, TreeEdge, evaluate, tree_from_supertags
from .convert import AlignedGraph, IOTA, OP1, _assign_sources, primitive_to_graph
from .graph import SOURCES, AmType, SemGraph, isomorphic
from .lf import LogicalForm

MODIFIER_LABELS = frozenset({IOTA, OP1})


class NonDecomposable(ValueError):
    pass


@dataclass
class Decomposition:
    tree: AmDepTree
    supertags: list[Supertag | None]
    labels: list[str | None]
    primitive: bool = False

    @property
    def edges(self) -> list[TreeEdge]:
        return self.tree.edges


def _reaches(graph: SemGraph, a: int, b: int) -> bool:
    stack, seen = [a], {a}
    while stack:
        x = stack.pop()
        if x == b:
            return True
        for e in graph.out_edges(x):
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return False


def decompose(g: AlignedGraph | SemGraph, n_tokens: int | None = None,
              verify: bool = True) -> Decomposition:
    graph = g.graph if isinstance(g, AlignedGraph) else g
    if n_tokens is None:
        n_tokens = g.token_count if isinstance(g, AlignedGraph) else \
            1 + max(n.alignment for n in graph.nodes.values() if n.alignment is not None)

    token_of: dict[int, int] = {}
    node_at: dict[int, int] = {}
    for n in graph.nodes.values():
        if n.label is None:
            raise NonDecomposable(f"node {n.id} is unlabelled")
        if n.alignment is None or not 0 <= n.alignment < n_tokens:
            raise NonDecomposable(f"node {n.id} ({n.label}) has no valid alignment")
        if n.alignment in node_at:
            raise NonDecomposable(f"token {n.alignment} owns two nodes")
        token_of[n.id] = n.alignment
        node_at[n.alignment] = n.id

    # source of each blob edge, keyed by (owner, target)
    src: dict[int, dict[int, str]] = {}
    for nid in graph.nodes:
        out = sorted(graph.out_edges(nid), key=lambda e: (e.label, e.target))
        if len({e.target for e in out}) != len(out):
            raise NonDecomposable(f"node {nid} has parallel edges")
        try:
            names = _assign_sources([e.label for e in out])
        except ValueError as exc:
            raise NonDecomposable(str(exc)) from exc
        src[nid] = {e.target: s for e, s in zip(out, names)}

    tree_parent: dict[int, tuple[int, str, str]] = {}   # dep node -> (head node, kind, source)
    for e in graph.edges:
        if e.label in MODIFIER_LABELS:
            if e.source in tree_parent:
                raise NonDecomposable(f"modifier node {e.source} modifies twice")
            tree_parent[e.source] = (e.target, MOD, src[e.source][e.target])

    for v in graph.nodes:
        parents = [e.source for e in graph.in_edges(v) if e.label not in MODIFIER_LABELS]
        if not parents:
            continue
        if len(parents) == 1:
            controller = parents[0]
        else:
            ctrl = [p for p in parents if all(q == p or _reaches(graph, p, q) for q in parents)]
            if len(ctrl) != 1:
                raise NonDecomposable(f"no unique controller for re-entrant node {v}")
            controller = ctrl[0]
            wanted = src[controller][v]
            for q in parents:
                if q == controller:
                    continue
                have = src[q][v]
                if have != wanted:
                    # swap source names inside q's blob
                    for t, s in src[q].items():
                        if s == wanted:
                            src[q][t] = have
                    src[q][v] = wanted
        if v in tree_parent:
            raise NonDecomposable(f"node {v} is both a modifier and an argument")
        tree_parent[v] = (controller, APP, src[controller][v])

    roots = [v for v in graph.nodes if v not in tree_parent]
    if roots != [graph.root]:
        raise NonDecomposable(f"tree roots {roots} do not match graph root {graph.root}")

    children: dict[int, list[int]] = defaultdict(list)
    for d, (h, _, _) in tree_parent.items():
        children[h].append(d)

    # remaining type of each subtree, and requests on the Apply sources
    requests: dict[int, dict[str, AmType]] = defaultdict(dict)
    remaining: dict[int, dict[str, int]] = {}   # node -> open source -> graph node

    def visit(v: int, depth: int = 0):
        if depth > len(graph.nodes):
            raise NonDecomposable("cycle in tree")
        open_ = {s: t for t, s in src[v].items()}
        for d in children[v]:
            visit(d, depth + 1)
            h, kind, s = tree_parent[d]
            if kind == MOD:
                if set(remaining[d]) != {s}:
                    raise NonDecomposable(f"modifier {d} keeps sources {sorted(remaining[d])}")
                continue
            open_.pop(s, None)
            rem = remaining[d]
            for r, target in rem.items():
                if src[v].get(target) != r:
                    raise NonDecomposable(
                        f"request {s}[{r}] of node {v} does not match one of its own slots")
                if requests[d].get(r):
                    raise NonDecomposable("request of depth greater than one needed")
            if rem:
                requests[v][s] = AmType(rem.keys())
        remaining[v] = open_

    visit(graph.root)
    if len(remaining) != len(graph.nodes):
        raise NonDecomposable("graph is not connected to its root")
    if remaining[graph.root]:
        raise NonDecomposable(f"root keeps open sources {sorted(remaining[graph.root])}")

    tags: list[Supertag | None] = [None] * n_tokens
    labels: list[str | None] = [None] * n_tokens
    for v, t in token_of.items():
        edges = tuple((e.label, src[v][e.target]) for e in graph.out_edges(v))
        tags[t] = Supertag(edges, tuple(requests[v].items()))
        labels[t] = graph.node(v).label
    tedges = [TreeEdge(token_of[h], token_of[d], Op(kind, s))
              for d, (h, kind, s) in tree_parent.items()]
    tree = tree_from_supertags(tags, labels, tedges)
    if verify:
        value = evaluate(tree)
        if not isomorphic(value, graph):
            raise NonDecomposable("evaluated tree differs from the input graph")
    return Decomposition(tree, tags, labels)


def decompose_primitive(lf: LogicalForm) -> Decomposition:
    """A primitive is a one-token sentence whose constant is its whole graph."""
    g = primitive_to_graph(lf)
    root = g.graph.node(g.root)
    edges = []
    for s, nid in g.slots.items():
        inc = g.graph.in_edges(nid)
        edges.append((inc[0].label, s))
    tag = Supertag(tuple(edges))
    tree = tree_from_supertags([tag], [root.label], [])
    return Decomposition(tree, [tag], [root.label], primitive=True)


# --- supertag lexicon -----------------------------------------------------

@dataclass
class SupertagLexicon:
    shape_counts: Counter = field(default_factory=Counter)
    lemma_shapes: dict[str, Counter] = field(default_factory=lambda: defaultdict(Counter))

    def add(self, d: Decomposition):
        for tag, lab in zip(d.supertags, d.labels):
            if tag is None:
                continue
            self.shape_counts[tag.key] += 1
            self.lemma_shapes[lab][tag.key] += 1

    @classmethod
    def build(cls, decompositions: Iterable[Decomposition]) -> "SupertagLexicon":
        lex = cls()
        for d in decompositions:
            lex.add(d)
        return lex

    def shapes(self) -> list[Supertag]:
        return [Supertag.parse(k) for k in sorted(self.shape_counts)]

    def __len__(self):
        return len(self.shape_counts)

    def dumps(self) -> str:
        lines = [f"shape\t{c}\t{k}" for k, c in sorted(self.shape_counts.items())]
        for lemma in sorted(self.lemma_shapes):
            for k, c in sorted(self.lemma_shapes[lemma].items()):
                lines.append(f"lemma\t{lemma}\t{c}\t{k}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SupertagLexicon":
        lex = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            parts = line.split("\t")
            if parts[0] == "shape" and len(parts) == 3:
                lex.shape_counts[parts[2]] = int(parts[1])
            elif parts[0] == "lemma" and len(parts) == 4:
                lex.lemma_shapes[parts[1]][parts[3]] = int(parts[2])
            else:
                raise ValueError(f"bad lexicon line {line!r}")
        return lex


def supertag_inventory(decompositions: Iterable[Decomposition]) -> Counter:
    return SupertagLexicon.build(decompositions).shape_counts


__all__ = ["NonDecomposable", "Decomposition", "decompose", "decompose_primitive",
           "SupertagLexicon", "supertag_inventory", "SOURCES"]
