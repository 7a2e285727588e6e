"""Exact projective decoding of well-typed AM dependency trees.

Eisner-style chart: complete items CR[h][e] / CL[h][b] hold the right /
left half of head ``h`` and are keyed by (candidate, applied-source mask);
incomplete items IR[h][d] / IL[h][d] record an arc whose dependent still
has to finish its other half, keyed by (head candidate, head mask,
dependent candidate, mask the dependent's other half must supply).
Tokens tagged with the bottom tag are absorbed by extending complete
items across them.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import ALL_OPS, APP, MOD, AmDepTree, Op, Supertag, TreeEdge, tree_from_supertags
from .graph import EMPTY, SOURCES, AmType

BIT = {s: 1 << i for i, s in enumerate(SOURCES)}
NEG = -math.inf


class NoParse(ValueError):
    pass


def mask_of(sources) -> int:
    m = 0
    for s in sources:
        m |= BIT[s]
    return m


@lru_cache(maxsize=4096)
def required_mask(dep_type: AmType, target: AmType) -> int | None:
    """Mask of sources the dependent must have applied so that its
    remaining type equals ``target``; None if impossible."""
    if not target.sources <= dep_type.sources:
        return None
    if dep_type.restrict(target.sources) != target:
        return None
    return mask_of(dep_type.sources - target.sources)


@dataclass
class ChartResult:
    score: float
    choice: list[int | None]          # candidate index per token, None for bottom
    edges: list[tuple[int, int, Op]]


_MOD_TARGETS = {s: AmType([s]) for s in SOURCES}


@lru_cache(maxsize=1024)
def _op_targets(ty: AmType):
    out = []
    for op in ALL_OPS:
        if op.kind == APP:
            if op.source in ty:
                out.append((op, BIT[op.source], ty.request(op.source)))
        else:
            out.append((op, 0, _MOD_TARGETS[op.source]))
    return tuple(out)


class _Tables:
    """Per-sentence lookup tables; target types are interned as ints."""

    def __init__(self, cands, edge_scores):
        self.n = len(cands)
        self.types = [[t for t, _ in c] for c in cands]
        self.full = [[mask_of(t.sources) for t in ts] for ts in self.types]
        targets: dict[AmType, int] = {}

        def tid(t):
            return targets.setdefault(t, len(targets))

        # per token and candidate: tuple of (op, bit, target id)
        self.head_ops = [[tuple((op, bit, tid(tgt)) for op, bit, tgt in _op_targets(t))
                          for t in ts] for ts in self.types]
        inv = list(targets)
        # req[tok][cand][target id] -> required applied mask or None
        self.req = [[[required_mask(t, g) for g in inv] for t in ts] for ts in self.types]
        self.E = {op: np.asarray(edge_scores[op], dtype=float) for op in ALL_OPS}


def chart_decode(cands: Sequence[Sequence[tuple[AmType, float]]],
                 bottom: Sequence[float | None] | None,
                 edge_scores: dict[Op, np.ndarray]) -> ChartResult:
    """Best projective well-typed tree.

    ``cands[t]`` lists (type, score) options for token t, ``bottom[t]`` the
    score of tagging t with bottom (None forbids it), ``edge_scores[op][h][d]``
    the score of edge h -> d with operation op.
    """
    n = len(cands)
    if n == 0:
        raise NoParse("empty sentence")
    if bottom is None:
        bottom = [None] * n
    tb = _Tables(cands, edge_scores)

    CR = [[None] * n for _ in range(n)]
    CL = [[None] * n for _ in range(n)]
    IR = [[None] * n for _ in range(n)]
    IL = [[None] * n for _ in range(n)]

    for h in range(n):
        CR[h][h] = {(c, 0): (sc, None) for c, (_, sc) in enumerate(cands[h])}
        CL[h][h] = {(c, 0): (0.0, None) for c in range(len(cands[h]))}

    def arcs(h, d, m_lo, m_hi, head_half, dep_half, table):
        """Items for arc h -> d; head_half(m) / dep_half(m) give the
        complete halves meeting between m and m+1."""
        req_d = tb.req[d]
        # valid (op, bit, required dep mask, edge score) per candidate pair
        combos = {}
        for ch, ops in enumerate(tb.head_ops[h]):
            for cd in range(len(req_d)):
                lst = []
                for op, bit, tgt in ops:
                    M = req_d[cd][tgt]
                    es = tb.E[op][h, d]
                    if M is not None and es != NEG:
                        lst.append((op, bit, M, es))
                if lst:
                    combos[ch, cd] = lst
        out = {}
        if not combos:
            table[h][d] = out
            return
        for m in range(m_lo, m_hi):
            H = head_half(m)
            D = dep_half(m)
            if not H or not D:
                continue
            hg: dict[int, list] = {}
            for (ch, ah), (hs, _) in H.items():
                hg.setdefault(ch, []).append((ah, hs))
            dg: dict[int, list] = {}
            for (cd, ad), (ds, _) in D.items():
                dg.setdefault(cd, []).append((ad, ds))
            for ch, hlist in hg.items():
                for cd, dlist in dg.items():
                    lst = combos.get((ch, cd))
                    if lst is None:
                        continue
                    for op, bit, M, es in lst:
                        for ad, ds in dlist:
                            if ad & ~M:
                                continue
                            need = M & ~ad
                            for ah, hs in hlist:
                                if bit & ah:
                                    continue
                                key = (ch, ah | bit, cd, need)
                                sc = hs + ds + es
                                old = out.get(key)
                                if old is None or sc > old[0]:
                                    out[key] = (sc, (m, (ch, ah), (cd, ad), op))
        table[h][d] = out

    for length in range(1, n):
        for i in range(n - length):
            j = i + length
            # right arc i -> j: CR[i][m] + CL[j][m+1]
            arcs(i, j, i, j, lambda m: CR[i][m], lambda m: CL[j][m + 1], IR)
            # left arc j -> i: CR[i][m] (dep) + CL[j][m+1] (head)
            arcs(j, i, i, j, lambda m: CL[j][m + 1], lambda m: CR[i][m], IL)

            # complete right CR[i][j]
            cr = {}
            if bottom[j] is not None and CR[i][j - 1]:
                for key, (sc, _) in CR[i][j - 1].items():
                    cr[key] = (sc + bottom[j], ("ext",))
            for d in range(i + 1, j + 1):
                inc, comp = IR[i][d], CR[d][j]
                if not inc or not comp:
                    continue
                for (ch, ah, cd, need), (sc, _) in inc.items():
                    c2 = comp.get((cd, need))
                    if c2 is None:
                        continue
                    tot = sc + c2[0]
                    key = (ch, ah)
                    old = cr.get(key)
                    if old is None or tot > old[0]:
                        cr[key] = (tot, ("comp", d, (ch, ah, cd, need)))
            CR[i][j] = cr

            # complete left CL[j][i]
            cl = {}
            if bottom[i] is not None and CL[j][i + 1]:
                for key, (sc, _) in CL[j][i + 1].items():
                    cl[key] = (sc + bottom[i], ("ext",))
            for d in range(i, j):
                inc, comp = IL[j][d], CL[d][i]
                if not inc or not comp:
                    continue
                for (ch, ah, cd, need), (sc, _) in inc.items():
                    c2 = comp.get((cd, need))
                    if c2 is None:
                        continue
                    tot = sc + c2[0]
                    key = (ch, ah)
                    old = cl.get(key)
                    if old is None or tot > old[0]:
                        cl[key] = (tot, ("comp", d, (ch, ah, cd, need)))
            CL[j][i] = cl

    best, best_key = NEG, None
    for r in range(n):
        left, right = CL[r][0], CR[r][n - 1]
        if not left or not right:
            continue
        for (c, al), (ls, _) in left.items():
            full = tb.full[r][c]
            ar = full & ~al
            if al & ~full:
                continue
            rv = right.get((c, ar))
            if rv is None:
                continue
            tot = ls + rv[0]
            if tot > best:
                best, best_key = tot, (r, c, al, ar)
    if best_key is None:
        raise NoParse("no well-typed projective tree")

    choice: list[int | None] = [None] * n
    edges: list[tuple[int, int, Op]] = []

    def walk_cr(h, e, key):
        sc, bp = CR[h][e][key]
        if bp is None:
            choice[h] = key[0]
        elif bp[0] == "ext":
            walk_cr(h, e - 1, key)
        else:
            _, d, ikey = bp
            walk_ir(h, d, ikey)
            walk_cr(d, e, (ikey[2], ikey[3]))

    def walk_cl(h, b, key):
        sc, bp = CL[h][b][key]
        if bp is None:
            return
        if bp[0] == "ext":
            walk_cl(h, b + 1, key)
        else:
            _, d, ikey = bp
            walk_il(h, d, ikey)
            walk_cl(d, b, (ikey[2], ikey[3]))

    def walk_ir(h, d, key):
        _, (m, hkey, dkey, op) = IR[h][d][key]
        edges.append((h, d, op))
        walk_cr(h, m, hkey)
        walk_cl(d, m + 1, dkey)

    def walk_il(h, d, key):
        _, (m, hkey, dkey, op) = IL[h][d][key]
        edges.append((h, d, op))
        walk_cl(h, m + 1, hkey)
        walk_cr(d, m, dkey)

    r, c, al, ar = best_key
    walk_cl(r, 0, (c, al))
    walk_cr(r, n - 1, (c, ar))
    return ChartResult(best, choice, sorted(edges, key=lambda e: (e[0], e[1])))


# --- brute force (test oracle) ----------------------------------------------

def _projective_trees(m: int):
    """All projective dependency trees over positions 0..m-1 with a single
    root, as parent tuples (root has parent -1)."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def spans(i, j, h):
        # subtrees covering [i, j] headed by h: tuples of (dep, head) pairs
        left = _side(i, h - 1, h, True)
        right = _side(h + 1, j, h, False)
        return tuple(l + r for l in left for r in right)

    @lru_cache(maxsize=None)
    def _side(i, j, h, is_left):
        # sequences of dependents of h covering [i, j] entirely
        if i > j:
            return ((),)
        out = []
        if is_left:
            # leftmost dependent d covers [i, k]; rest covers [k+1, j]
            for k in range(i, j + 1):
                for d in range(i, k + 1):
                    for sub in spans(i, k, d):
                        for rest in _side(k + 1, j, h, True):
                            out.append(sub + ((d, h),) + rest)
        else:
            for k in range(i, j + 1):
                for d in range(k, j + 1):
                    for sub in spans(k, j, d):
                        for rest in _side(i, k - 1, h, False):
                            out.append(rest + sub + ((d, h),))
        return tuple(out)

    trees = []
    for r in range(m):
        for arcs in spans(0, m - 1, r):
            parent = [-1] * m
            for d, h in arcs:
                parent[d] = h
            trees.append(tuple(parent))
    return trees


_TREE_CACHE: dict[int, list] = {}


def brute_force(cands, bottom, edge_scores) -> float:
    """Best score by enumerating bottom subsets and projective trees, with
    an exact assignment search per fixed tree."""
    import itertools

    n = len(cands)
    if bottom is None:
        bottom = [None] * n
    best = NEG
    optional = [t for t in range(n) if bottom[t] is not None]
    for r in range(len(optional) + 1):
        for bots in itertools.combinations(optional, r):
            active = [t for t in range(n) if t not in bots]
            if not active:
                continue
            base = sum(bottom[t] for t in bots)
            m = len(active)
            if m not in _TREE_CACHE:
                _TREE_CACHE[m] = _projective_trees(m)
            for parent in _TREE_CACHE[m]:
                v = _fixed_tree(active, parent, cands, edge_scores)
                if v + base > best:
                    best = v + base
    return best


def _fixed_tree(active, parent, cands, edge_scores) -> float:
    m = len(active)
    kids = [[] for _ in range(m)]
    root = None
    for i, p in enumerate(parent):
        if p < 0:
            root = i
        else:
            kids[p].append(i)

    memo: dict = {}

    def value(i, target: AmType) -> float:
        # best subtree score at node i whose remaining type equals target
        if (i, target) not in memo:
            memo[(i, target)] = _value(i, target)
        return memo[(i, target)]

    def _value(i, target: AmType) -> float:
        t = active[i]
        best = NEG
        for c, (ty, sc) in enumerate(cands[t]):
            M = required_mask(ty, target)
            if M is None:
                continue
            # knapsack over children: dict applied-mask -> score
            states = {0: sc}
            for k in kids[i]:
                dk = active[k]
                new = {}
                for op, bit, tgt in _op_targets(ty):
                    es = edge_scores[op][t][dk]
                    if es == NEG:
                        continue
                    sub = value(k, tgt)
                    if sub == NEG:
                        continue
                    for a, v in states.items():
                        if a & bit:
                            continue
                        a2 = a | bit
                        tot = v + sub + es
                        if tot > new.get(a2, NEG):
                            new[a2] = tot
                states = new
                if not states:
                    break
            if M in states and states[M] > best:
                best = states[M]
        return best

    return value(root, EMPTY)


# --- model-driven decoding ------------------------------------------------

@dataclass
class DecodeResult:
    tree: AmDepTree
    score: float
    supertags: list[Supertag | None]
    labels: list[str | None]


def decode(model, lexicon, sentence: Sequence[str], k: int = 3,
           margin: float | None = None) -> DecodeResult:
    """Best tree using each token's top-k lexicon shapes and the bottom tag.

    With ``margin`` set, options scoring more than ``margin`` below the
    token's best option (bottom included) are dropped before the search.
    """
    from .scorer import BOTTOM

    if not sentence:
        raise NoParse("empty sentence")
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(lexicon) == 0:
        raise ValueError("empty supertag lexicon")
    known = set(lexicon.shape_counts)
    classes = model.supertag.classes
    usable = [i for i, c in enumerate(classes) if c != BOTTOM and c in known]
    if not usable:
        raise NoParse("no supertag of the model is in the lexicon")
    shapes = {i: Supertag.parse(classes[i]) for i in usable}
    tag_scores = model.supertag_scores(sentence)
    bot = model.supertag.class_index.get(BOTTOM)
    labels_scored = model.best_labels(sentence)
    cands, cand_ids, bottom = [], [], []
    for t in range(len(sentence)):
        lab = labels_scored[t][1]
        lab = lab if math.isfinite(lab) else 0.0
        order = sorted(usable, key=lambda i: (-tag_scores[t, i], i))[:k]
        b = float(tag_scores[t, bot]) if bot is not None else None
        if margin is not None:
            top = max([tag_scores[t, i] for i in order] + ([b] if b is not None else []))
            order = [i for i in order if tag_scores[t, i] >= top - margin] or order[:1]
            if b is not None and b < top - margin:
                b = None
        cand_ids.append(order)
        # a token with a constant also pays for its label
        cands.append([(shapes[i].type, float(tag_scores[t, i]) + lab) for i in order])
        bottom.append(b)
    res = chart_decode(cands, bottom, model.edge_scores(sentence))
    tags = [shapes[cand_ids[t][c]] if c is not None else None for t, c in enumerate(res.choice)]
    labels = [labels_scored[t][0] if c is not None else None for t, c in enumerate(res.choice)]
    tree = tree_from_supertags(tags, labels, [TreeEdge(h, d, op) for h, d, op in res.edges])
    return DecodeResult(tree, res.score, tags, labels)


def parse_to_lf(model, lexicon, sentence: Sequence[str], k: int = 3,
                margin: float | None = None):
    from .algebra import evaluate
    from .convert import graph_to_lf

    result = decode(model, lexicon, sentence, k, margin)
    return graph_to_lf(evaluate(result.tree), list(sentence))
