"""Corpus loading, exact-match evaluation, reports and error diffs."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .lf import LfError, LogicalForm, Term, parse_lf

log = logging.getLogger(__name__)

STRUCT = ("obj_pp_to_subj_pp", "cp_recursion", "pp_recursion")
PROP = ("prim_to_obj_proper", "subj_to_obj_proper")
LEX = (
    "subj_to_obj_common", "obj_to_subj_common", "obj_to_subj_proper",
    "prim_to_subj_common", "prim_to_subj_proper", "prim_to_obj_common", "prim_to_inf_arg",
    "active_to_passive", "passive_to_active", "obj_omitted_transitive_to_transitive",
    "unacc_to_transitive", "do_dative_to_pp_dative", "pp_dative_to_do_dative",
    "only_seen_as_transitive_subj_as_unacc_subj",
    "only_seen_as_unacc_subj_as_obj_omitted_transitive_subj",
    "only_seen_as_unacc_subj_as_unerg_subj",
)
GEN_TYPES = STRUCT + PROP + LEX
CLASS_OF = {**{t: "Struct" for t in STRUCT}, **{t: "Prop" for t in PROP},
            **{t: "Lex" for t in LEX}}
CLASSES = ("Struct", "Prop", "Lex")


class FormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LengthMismatch(ValueError):
    pass


@dataclass
class CorpusItem:
    tokens: list[str]
    lf: str
    gen_type: str = "in_distribution"

    @property
    def sentence(self) -> str:
        return " ".join(self.tokens)


def load_corpus(path: str | Path) -> list[CorpusItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
            sent, lf, gen = parts
            items.append(CorpusItem(sent.split(), lf, gen))
    if not items:
        log.warning("%s contains no items", path)
    return items


def corpus_stats(items: Sequence[CorpusItem]) -> dict:
    return {"items": len(items), "per_type": dict(sorted(Counter(i.gen_type for i in items).items()))}


def normalize(text: str) -> str:
    return " ".join(text.split())


def exact_match(gold: str, pred: str, strict: bool = False) -> bool:
    if strict:
        return gold == pred
    return normalize(gold) == normalize(pred)


def pp_depth(lf: LogicalForm | str) -> int:
    """Length of the longest chain of nmod terms in a formula."""
    if isinstance(lf, str):
        lf = parse_lf(lf)
    nxt = defaultdict(list)
    for t in lf.conjuncts:
        if t.is_nmod:
            nxt[t.args[0].value].append(t.args[1].value)
    memo: dict = {}

    def longest(x):
        if x not in memo:
            memo[x] = max((1 + longest(y) for y in nxt.get(x, ())), default=0)
        return memo[x]

    return max((longest(x) for x in list(nxt)), default=0)


@dataclass
class EvalReport:
    overall: float
    per_type: dict[str, float]
    per_class: dict[str, float]
    pp_depth_curve: dict[int, float]
    counts: dict[str, int]
    correct: dict[str, int]
    class_counts: dict[str, int] = field(default_factory=dict)
    depth_counts: dict[int, int] = field(default_factory=dict)
    total: int = 0

    def to_json(self) -> str:
        d = {
            "overall": self.overall, "total": self.total,
            "per_type": self.per_type, "per_class": self.per_class,
            "pp_depth_curve": {str(k): v for k, v in self.pp_depth_curve.items()},
            "counts": self.counts, "correct": self.correct,
            "class_counts": self.class_counts,
            "depth_counts": {str(k): v for k, v in self.depth_counts.items()},
        }
        return json.dumps(d, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "name", "count", "accuracy"])
        w.writerow(["overall", "all", self.total, self.overall])
        for c, acc in self.per_class.items():
            w.writerow(["class", c, self.class_counts.get(c, 0), acc])
        for t, acc in self.per_type.items():
            w.writerow(["type", t, self.counts[t], acc])
        return buf.getvalue()

    def depth_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["depth", "accuracy"])
        for d, acc in sorted(self.pp_depth_curve.items()):
            w.writerow([d, acc])
        return buf.getvalue()


def evaluate(gold: Sequence[CorpusItem], preds: Sequence[str], strict: bool = False) -> EvalReport:
    if len(gold) != len(preds):
        raise LengthMismatch(f"{len(gold)} gold items but {len(preds)} predictions")
    counts, correct = Counter(), Counter()
    ccounts, ccorrect = Counter(), Counter()
    dcounts, dcorrect = Counter(), Counter()
    for item, pred in zip(gold, preds):
        ok = exact_match(item.lf, pred, strict)
        counts[item.gen_type] += 1
        correct[item.gen_type] += ok
        cls = CLASS_OF.get(item.gen_type)
        if cls is not None:
            ccounts[cls] += 1
            ccorrect[cls] += ok
        if item.gen_type == "pp_recursion":
            d = pp_depth(item.lf)
            dcounts[d] += 1
            dcorrect[d] += ok
    total = sum(counts.values())
    return EvalReport(
        overall=sum(correct.values()) / total if total else 0.0,
        per_type={t: correct[t] / counts[t] for t in sorted(counts)},
        per_class={c: ccorrect[c] / ccounts[c] for c in CLASSES if ccounts[c]},
        pp_depth_curve={d: dcorrect[d] / dcounts[d] for d in sorted(dcounts)},
        counts=dict(sorted(counts.items())),
        correct={t: correct[t] for t in sorted(counts)},
        class_counts={c: ccounts[c] for c in CLASSES if ccounts[c]},
        depth_counts=dict(sorted(dcounts.items())),
        total=total,
    )


# --- diffs ----------------------------------------------------------------

@dataclass
class TermDiff:
    kind: str                 # "changed", "missing" (gold only) or "extra" (pred only)
    gold: str | None
    pred: str | None
    positions: tuple[int, ...] = ()   # differing argument slots; -1 marks the predicate

    def render(self) -> str:
        if self.kind == "missing":
            return f"- {self.gold}"
        if self.kind == "extra":
            return f"+ {self.pred}"
        return f"~ {self.gold} -> {self.pred} (args {','.join(map(str, self.positions))})"


@dataclass
class ItemDiff:
    index: int
    sentence: str
    gold: str
    pred: str
    terms: list[TermDiff]

    def render(self) -> str:
        lines = [f"#{self.index}: {self.sentence}", f"  gold: {self.gold}", f"  pred: {self.pred}"]
        lines += ["  " + t.render() for t in self.terms]
        return "\n".join(lines)


def _terms(text: str) -> list[tuple[str, Term]]:
    lf = parse_lf(text)
    return [("*", t) for t in lf.iota] + [("", t) for t in lf.conjuncts]


def _show(tagged: tuple[str, Term]) -> str:
    star, t = tagged
    return star + t.render(False)


def term_diff(gold: str, pred: str) -> list[TermDiff]:
    """Align terms: identical ones match first, remaining pairs with the
    same predicate are reported as changed arguments, the rest are
    missing or extra."""
    try:
        g, p = _terms(gold), _terms(pred)
    except LfError:
        if normalize(gold) == normalize(pred):
            return []
        return [TermDiff("changed", normalize(gold), normalize(pred), (-1,))]
    common = Counter(map(_show, g)) & Counter(map(_show, p))

    def leftover(terms):
        left, out = Counter(common), []
        for t in terms:
            if left[_show(t)] > 0:
                left[_show(t)] -= 1
            else:
                out.append(t)
        return out

    rest_g, rest_p = leftover(g), leftover(p)
    out, used = [], set()
    for tg in rest_g:
        match = None
        for k, tp in enumerate(rest_p):
            if k not in used and tp[0] == tg[0] and tp[1].predicate == tg[1].predicate:
                match = k
                break
        if match is None:
            out.append(TermDiff("missing", _show(tg), None))
            continue
        used.add(match)
        tp = rest_p[match]
        pos = tuple(i for i, (a, b) in enumerate(zip(tg[1].args, tp[1].args)) if a != b)
        out.append(TermDiff("changed", _show(tg), _show(tp), pos))
    for k, tp in enumerate(rest_p):
        if k not in used:
            out.append(TermDiff("extra", None, _show(tp)))
    return out


def diff_report(gold: Sequence[CorpusItem], preds: Sequence[str], n: int = 20,
                strict: bool = False) -> list[ItemDiff]:
    if len(gold) != len(preds):
        raise LengthMismatch(f"{len(gold)} gold items but {len(preds)} predictions")
    out = []
    for i, (item, pred) in enumerate(zip(gold, preds)):
        if len(out) >= n:
            break
        if exact_match(item.lf, pred, strict):
            continue
        out.append(ItemDiff(i, item.sentence, item.lf, pred, term_diff(item.lf, pred)))
    return out
