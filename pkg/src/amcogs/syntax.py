"""Constituency trees: label coarsening, linearization and bracket matching.

Labeled trees are written ``(NP (Det a) (N rose))``.  The unlabeled form
keeps only brackets and terminals, ``((a)(rose))``; terminals that share a
bracket are separated by single spaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import LengthMismatch


class TreeSyntaxError(ValueError):
    """Malformed bracketed tree."""


class UnknownLabel(KeyError):
    pass


@dataclass
class ConstTree:
    label: str | None                      # None for unlabeled nonterminals
    children: list["ConstTree"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.label]
        return [w for c in self.children for w in c.leaves()]

    def nonterminals(self) -> set[str]:
        if self.is_leaf:
            return set()
        out = {self.label} if self.label is not None else set()
        for c in self.children:
            out |= c.nonterminals()
        return out

    def unlabeled(self) -> "ConstTree":
        if self.is_leaf:
            return ConstTree(self.label)
        return ConstTree(None, [c.unlabeled() for c in self.children])

    def __str__(self):
        return linearize(self, labeled=self.label is not None or self.is_leaf)


def leaf(word: str) -> ConstTree:
    return ConstTree(word)


def node(label: str | None, *children: ConstTree | str) -> ConstTree:
    return ConstTree(label, [leaf(c) if isinstance(c, str) else c for c in children])


# --- coarsening -----------------------------------------------------------

def _collapse(t: ConstTree) -> ConstTree:
    if t.is_leaf:
        return t
    kids = [_collapse(c) for c in t.children]
    # drop X -> X: a node whose only child is a nonterminal with its label
    while len(kids) == 1 and not kids[0].is_leaf and kids[0].label == t.label:
        kids = kids[0].children
    return ConstTree(t.label, kids)


def coarsen(t: ConstTree, label_map: Mapping[str, str]) -> ConstTree:
    def relabel(x: ConstTree) -> ConstTree:
        if x.is_leaf:
            return x
        if x.label not in label_map:
            raise UnknownLabel(x.label)
        return ConstTree(label_map[x.label], [relabel(c) for c in x.children])

    return _collapse(relabel(t))


def has_duplicate_unary(t: ConstTree) -> bool:
    if t.is_leaf:
        return False
    if len(t.children) == 1 and not t.children[0].is_leaf and t.children[0].label == t.label:
        return True
    return any(has_duplicate_unary(c) for c in t.children)


def prefix_label_map(labels: Iterable[str], sep: str = "_") -> dict[str, str]:
    """Map fine labels such as ``NP_animate_dobj_noPP`` to their prefix."""
    return {lab: lab.split(sep, 1)[0] for lab in labels}


def load_label_map(path: str | Path) -> dict[str, str]:
    """Read a two-column (fine, coarse) whitespace-separated file."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'fine coarse'")
        out[parts[0]] = parts[1]
    return out


# --- linearization --------------------------------------------------------

def linearize(t: ConstTree, labeled: bool = True) -> str:
    if t.is_leaf:
        return t.label
    if labeled:
        if t.label is None:
            raise ValueError("cannot write an unlabeled node in labeled form")
        return "(" + " ".join([t.label] + [linearize(c, True) for c in t.children]) + ")"
    parts = []
    for i, c in enumerate(t.children):
        if i and c.is_leaf and t.children[i - 1].is_leaf:
            parts.append(" ")
        parts.append(linearize(c, False))
    return "(" + "".join(parts) + ")"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_tree(text: str, labeled: bool = True) -> ConstTree:
    toks = _TOKEN.findall(text)
    if not toks:
        raise TreeSyntaxError("empty tree")
    pos = 0

    def parse() -> ConstTree:
        nonlocal pos
        if pos >= len(toks):
            raise TreeSyntaxError("unexpected end of input")
        tok = toks[pos]
        if tok == ")":
            raise TreeSyntaxError(f"unexpected ')' at token {pos}")
        pos += 1
        if tok != "(":
            return ConstTree(tok)
        label = None
        if labeled:
            if pos >= len(toks) or toks[pos] in "()":
                raise TreeSyntaxError(f"missing label at token {pos}")
            label = toks[pos]
            pos += 1
        kids = []
        while pos < len(toks) and toks[pos] != ")":
            kids.append(parse())
        if pos >= len(toks):
            raise TreeSyntaxError("unbalanced brackets")
        pos += 1
        if not kids:
            raise TreeSyntaxError("nonterminal without children")
        return ConstTree(label, kids)

    tree = parse()
    if pos != len(toks):
        raise TreeSyntaxError(f"trailing input after token {pos}")
    return tree


def load_trees(path: str | Path, labeled: bool = True) -> list[ConstTree]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [parse_tree(line, labeled) for line in lines if line.strip()]


def bracket_exact_match(gold: Sequence[ConstTree], pred: Sequence[ConstTree],
                        labeled: bool = True) -> float:
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold trees but {len(pred)} predictions")
    if not gold:
        return 0.0

    def lin(t):
        return linearize(t if labeled else t.unlabeled(), labeled)

    return sum(lin(g) == lin(p) for g, p in zip(gold, pred)) / len(gold)
