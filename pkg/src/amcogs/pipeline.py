"""Glue between the corpus files, decomposition, training and decoding."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algebra import IllTyped, Supertag
from .convert import ConversionError, lf_to_graph, primitive_graph_to_lf
from .decompose import Decomposition, NonDecomposable, SupertagLexicon, decompose, decompose_primitive
from .decoder import NoParse, parse_to_lf
from .lf import LfError, parse_lf, print_lf
from .scorer import BOTTOM, Scorer, ScorerConfig, TrainingItem, train, training_item

log = logging.getLogger(__name__)

DEFAULT_K = 3
DEFAULT_MARGIN = 1.0
MAX_K = 12


def decompose_item(tokens: Sequence[str], lf_text: str) -> Decomposition:
    lf = parse_lf(lf_text)
    if lf.is_primitive:
        return decompose_primitive(lf)
    return decompose(lf_to_graph(lf, list(tokens)))


@dataclass
class Prepared:
    items: list[TrainingItem] = field(default_factory=list)
    lexicon: SupertagLexicon = field(default_factory=SupertagLexicon)
    skipped: list[tuple[int, str]] = field(default_factory=list)


def prepare(corpus: Iterable) -> Prepared:
    """Decompose every item; items that fail are logged and skipped."""
    out = Prepared()
    for i, item in enumerate(corpus):
        lf = item.lf if isinstance(item.lf, str) else print_lf(item.lf)
        try:
            d = decompose_item(item.tokens, lf)
        except (LfError, ConversionError, NonDecomposable) as exc:
            log.warning("item %d skipped: %s", i, exc)
            out.skipped.append((i, str(exc)))
            continue
        out.lexicon.add(d)
        out.items.append(training_item(item.tokens, d))
    return out


def train_model(corpus: Iterable, config: ScorerConfig | None = None) -> tuple[Scorer, SupertagLexicon, Prepared]:
    prep = prepare(corpus)
    return train(prep.items, config), prep.lexicon, prep


def _primitive(model: Scorer, lexicon: SupertagLexicon, token: str):
    scores = model.supertag_scores([token])[0]
    known = set(lexicon.shape_counts)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    for i in order:
        key = model.supertag.classes[i]
        if key != BOTTOM and key in known:
            label = model.best_labels([token])[0][0]
            return primitive_graph_to_lf(Supertag.parse(key).instantiate(label, 0))
    raise NoParse("no supertag of the model is in the lexicon")


def predict(model: Scorer, lexicon: SupertagLexicon, tokens: Sequence[str], k: int = DEFAULT_K,
            margin: float | None = DEFAULT_MARGIN, max_k: int = MAX_K, fmt: str = "tokenized") -> str:
    """Predicted LF string; an empty string when no tree is found.

    One-token inputs are read as primitives.  On NoParse the search is
    retried with k doubled (and no margin) until ``max_k``.
    """
    if len(tokens) == 1:
        return print_lf(_primitive(model, lexicon, tokens[0]), fmt)
    while True:
        try:
            return print_lf(parse_to_lf(model, lexicon, tokens, k, margin), fmt)
        except NoParse:
            if k >= max_k:
                log.warning("no parse for %r", " ".join(tokens))
                return ""
            k, margin = min(2 * k, max_k), None
        except (ConversionError, IllTyped) as exc:
            log.warning("bad output for %r: %s", " ".join(tokens), exc)
            return ""
