"""Feature-based scores for supertags, tree edges and node labels.

Three linear multi-class models share one design: sparse string features
mapped to rows of a weight matrix, plus optional dense features (the 64
sine-cosine components of the relative distance) with their own matrix.
All features are relative to the scored token or token pair; nothing
refers to absolute sentence positions.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import ALL_OPS, Op

DIST_DIM = 64
BOTTOM = "<bot>"
NO_EDGE = "NONE"
UNK = "<UNK>"
FORMAT_VERSION = 1


class EmptyCorpus(ValueError):
    pass


def dist_encode(i: int, j: int, dims: int = DIST_DIM) -> np.ndarray:
    """Sine-cosine encoding of the relative distance ``i - j``."""
    return _dist_encode(i - j, dims).copy()


@lru_cache(maxsize=512)
def _dist_encode(dist: int, dims: int) -> np.ndarray:
    d = float(dist)
    k = np.arange(dims // 2)
    angle = d / np.power(10000.0, 2 * k / dims)
    out = np.empty(dims)
    out[0::2] = np.sin(angle)
    out[1::2] = np.cos(angle)
    return out


def dist_bucket(d: int) -> str:
    a = abs(d)
    sign = "-" if d < 0 else "+"
    if a <= 6:
        return f"{sign}{a}"
    if a <= 10:
        return f"{sign}7-10"
    return f"{sign}11+"


# --- label edit rules -----------------------------------------------------

def label_rule(form: str, label: str) -> str:
    """Edit rule ``C|strip:append`` turning ``form`` into ``label``; C is K
    (keep case) or L (lower-case first)."""
    best = None
    for case, base in (("K", form), ("L", form.lower())):
        lcp = 0
        while lcp < min(len(base), len(label)) and base[lcp] == label[lcp]:
            lcp += 1
        rule = (len(base) - lcp, case, label[lcp:])
        if best is None or rule[0] < best[0]:
            best = rule
    strip, case, append = best
    return f"{case}|{strip}:{append}"


def apply_rule(rule: str, form: str) -> str | None:
    case, rest = rule.split("|", 1)
    strip, append = rest.split(":", 1)
    base = form.lower() if case == "L" else form
    n = int(strip)
    if n > len(base) or (n == len(base) and not append):
        return None
    return base[:len(base) - n] + append


# --- feature extraction ---------------------------------------------------

def _forms(sentence: Sequence[str], vocab: set[str] | None) -> list[str]:
    out = []
    for w in sentence:
        lw = w.lower()
        out.append(lw if vocab is None or lw in vocab else UNK)
    return out


def token_features(sentence: Sequence[str], t: int, forms: list[str] | None = None) -> list[str]:
    forms = forms if forms is not None else _forms(sentence, None)
    n = len(sentence)

    def at(i):
        return forms[i] if 0 <= i < n else ("<S>" if i < 0 else "</S>")

    w, raw = at(t), sentence[t].lower()
    return [
        "bias", f"w={w}", f"cap={sentence[t][:1].isupper()}", f"s2={raw[-2:]}", f"s3={raw[-3:]}",
        f"p1={at(t - 1)}", f"p2={at(t - 2)}", f"n1={at(t + 1)}", f"n2={at(t + 2)}",
        f"p1w={at(t - 1)}|{w}", f"wn1={w}|{at(t + 1)}",
    ]


def edge_features(sentence: Sequence[str], h: int, d: int, use_distance: bool,
                  forms: list[str] | None = None) -> list[str]:
    forms = forms if forms is not None else _forms(sentence, None)
    hw, dw = forms[h], forms[d]
    hs, ds = sentence[h].lower()[-3:], sentence[d].lower()[-3:]
    hl = forms[h - 1] if h > 0 else "<S>"
    direction = "R" if d > h else "L"
    feats = [
        "bias", f"h={hw}", f"d={dw}", f"hd={hw}|{dw}", f"dir={direction}",
        f"hdir={hw}|{direction}", f"ddir={dw}|{direction}", f"hs={hs}", f"ds={ds}",
        f"hsds={hs}|{ds}|{direction}", f"hl={hl}", f"hld={hl}|{dw}",
    ]
    if use_distance:
        b = dist_bucket(h - d)
        feats += [f"db={b}", f"dbh={b}|{hw}", f"dbd={b}|{dw}", f"dbhs={b}|{hs}|{ds}"]
    return feats


# --- linear classifier ----------------------------------------------------

@dataclass
class Batch:
    """Examples as a flat feature-index array with offsets (CSR rows)."""

    feats: np.ndarray
    offsets: np.ndarray
    dense: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.offsets) - 1

    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.size), np.diff(self.offsets))


def sparse_scores(W: np.ndarray, D: np.ndarray | None, batch: Batch) -> np.ndarray:
    s = np.zeros((batch.size, W.shape[1]))
    starts = batch.offsets[:-1]
    filled = starts < batch.offsets[1:]
    # reduceat misreads empty rows, so only sum the rows that have features
    if filled.any():
        s[filled] = np.add.reduceat(W[batch.feats], starts[filled], axis=0)
    if D is not None and batch.dense is not None:
        s = s + batch.dense @ D
    return s


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logistic_loss_and_grad(W: np.ndarray, D: np.ndarray | None, batch: Batch, y: np.ndarray,
                           l2: float = 0.0):
    """Mean softmax cross-entropy and its gradient with respect to W and D."""
    s = sparse_scores(W, D, batch)
    z = s - s.max(axis=1, keepdims=True)
    logz = np.log(np.exp(z).sum(axis=1))
    m = batch.size
    loss = float(np.mean(logz - z[np.arange(m), y])) + 0.5 * l2 * float((W ** 2).sum())
    G = _softmax(s)
    G[np.arange(m), y] -= 1.0
    G /= m
    gW = np.zeros_like(W)
    np.add.at(gW, batch.feats, G[batch.rows()])
    gW += l2 * W
    gD = None
    if D is not None and batch.dense is not None:
        gD = batch.dense.T @ G
        if l2:
            loss += 0.5 * l2 * float((D ** 2).sum())
            gD = gD + l2 * D
    return loss, gW, gD


class LinearClassifier:
    def __init__(self, classes: Sequence[str], features: Sequence[str], dense_dim: int = 0):
        self.classes = list(classes)
        self.class_index = {c: i for i, c in enumerate(self.classes)}
        self.features = list(features)
        self.feature_index = {f: i for i, f in enumerate(self.features)}
        self.dense_dim = dense_dim
        self.W = np.zeros((len(self.features), len(self.classes)))
        self.D = np.zeros((dense_dim, len(self.classes))) if dense_dim else None

    def encode(self, examples: Sequence[Sequence[str]], dense: np.ndarray | None = None) -> Batch:
        idx, offsets = [], [0]
        fi = self.feature_index
        for feats in examples:
            row = [fi[f] for f in feats if f in fi]
            idx.extend(row)
            offsets.append(len(idx))
        return Batch(np.asarray(idx, dtype=np.int64), np.asarray(offsets, dtype=np.int64),
                     dense if self.dense_dim else None)

    def scores(self, batch: Batch) -> np.ndarray:
        return sparse_scores(self.W, self.D, batch)


class _Trainer:
    """Averaged perceptron (batch per sentence) or logistic SGD."""

    def __init__(self, clf: LinearClassifier, loss: str, lr: float, l2: float):
        self.clf, self.loss, self.lr, self.l2 = clf, loss, lr, l2
        self.c = 1
        self.UW = np.zeros_like(clf.W)
        self.UD = np.zeros_like(clf.D) if clf.D is not None else None

    def step(self, batch: Batch, y: np.ndarray):
        clf = self.clf
        if batch.size == 0:
            return
        if self.loss == "perceptron":
            pred = clf.scores(batch).argmax(axis=1)
            wrong = np.nonzero(pred != y)[0]
            if len(wrong):
                delta = np.zeros((batch.size, len(clf.classes)))
                delta[wrong, y[wrong]] += self.lr
                delta[wrong, pred[wrong]] -= self.lr
                rows = batch.rows()
                upd = delta[rows]
                np.add.at(clf.W, batch.feats, upd)
                np.add.at(self.UW, batch.feats, self.c * upd)
                if clf.D is not None and batch.dense is not None:
                    dD = batch.dense.T @ delta
                    clf.D += dD
                    self.UD += self.c * dD
        else:
            _, gW, gD = logistic_loss_and_grad(clf.W, clf.D, batch, y, self.l2)
            clf.W -= self.lr * gW
            if gD is not None:
                clf.D -= self.lr * gD
        self.c += 1

    def finish(self):
        if self.loss == "perceptron":
            self.clf.W = self.clf.W - self.UW / self.c
            if self.clf.D is not None:
                self.clf.D = self.clf.D - self.UD / self.c


# --- the scorer -----------------------------------------------------------

@dataclass
class ScorerConfig:
    epochs: int = 10
    lr: float = 0.1
    loss: str = "perceptron"
    vocab_threshold: int = 1
    use_distance: bool = True
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.loss not in ("perceptron", "logistic"):
            raise ValueError(f"unknown loss {self.loss!r}")


EDGE_CLASSES = [NO_EDGE] + [str(op) for op in ALL_OPS]


@dataclass
class TrainingItem:
    tokens: list[str]
    supertags: list[str | None]    # shape keys, None for the bottom tag
    labels: list[str | None]
    edges: dict[tuple[int, int], str] = field(default_factory=dict)   # (head, dep) -> op


def training_item(tokens: Sequence[str], decomposition) -> TrainingItem:
    return TrainingItem(
        list(tokens),
        [t.key if t is not None else None for t in decomposition.supertags],
        list(decomposition.labels),
        {(e.head, e.dep): str(e.op) for e in decomposition.edges},
    )


class Scorer:
    def __init__(self, config: ScorerConfig, vocab: set[str], supertag: LinearClassifier,
                 edge: LinearClassifier, label: LinearClassifier):
        self.config = config
        self.vocab = vocab
        self.supertag = supertag
        self.edge = edge
        self.label = label

    # -- feature helpers
    def forms(self, sentence: Sequence[str]) -> list[str]:
        return _forms(sentence, self.vocab)

    def _edge_batch(self, sentence: Sequence[str], pairs, forms=None) -> Batch:
        forms = forms or self.forms(sentence)
        use = self.config.use_distance
        feats = [edge_features(sentence, h, d, use, forms) for h, d in pairs]
        dense = np.array([_dist_encode(h - d, DIST_DIM) for h, d in pairs]) if use and pairs else None
        if dense is None and self.edge.dense_dim:
            dense = np.zeros((len(pairs), self.edge.dense_dim))
        return self.edge.encode(feats, dense)

    def _token_batch(self, clf: LinearClassifier, sentence: Sequence[str], forms=None) -> Batch:
        forms = forms or self.forms(sentence)
        return clf.encode([token_features(sentence, t, forms) for t in range(len(sentence))])

    # -- bulk scores used by the decoder
    def supertag_scores(self, sentence: Sequence[str]) -> np.ndarray:
        return self.supertag.scores(self._token_batch(self.supertag, sentence))

    def label_scores(self, sentence: Sequence[str]) -> np.ndarray:
        return self.label.scores(self._token_batch(self.label, sentence))

    def edge_scores(self, sentence: Sequence[str]) -> dict[Op, np.ndarray]:
        """Per operation an n x n matrix of score(op) - score(NONE); the
        diagonal is -inf."""
        n = len(sentence)
        pairs = [(h, d) for h in range(n) for d in range(n) if h != d]
        out = {op: np.full((n, n), -np.inf) for op in ALL_OPS}
        if not pairs:
            return out
        s = self.edge.scores(self._edge_batch(sentence, pairs))
        none = s[:, self.edge.class_index[NO_EDGE]]
        hs = np.array([p[0] for p in pairs])
        ds = np.array([p[1] for p in pairs])
        for op in ALL_OPS:
            out[op][hs, ds] = s[:, self.edge.class_index[str(op)]] - none
        return out

    def best_labels(self, sentence: Sequence[str]) -> list[tuple[str, float]]:
        scores = self.label_scores(sentence)
        out = []
        for t, form in enumerate(sentence):
            best = (form, -math.inf)
            for c in np.argsort(-scores[t], kind="stable"):
                lab = apply_rule(self.label.classes[c], form)
                if lab is not None:
                    best = (lab, float(scores[t, c]))
                    break
            out.append(best)
        return out

    # -- single scores
    def score_edge(self, sentence: Sequence[str], head: int, dep: int, op: Op | str) -> float:
        s = self.edge.scores(self._edge_batch(sentence, [(head, dep)]))[0]
        return float(s[self.edge.class_index[str(op)]] - s[self.edge.class_index[NO_EDGE]])

    def score_supertag(self, sentence: Sequence[str], t: int, shape) -> float:
        key = BOTTOM if shape is None else str(shape)
        s = self.supertag.scores(self.supertag.encode(
            [token_features(sentence, t, self.forms(sentence))]))[0]
        return float(s[self.supertag.class_index[key]]) if key in self.supertag.class_index else -math.inf

    def score_label(self, sentence: Sequence[str], t: int, label: str) -> float:
        s = self.label.scores(self.label.encode(
            [token_features(sentence, t, self.forms(sentence))]))[0]
        vals = [s[i] for i, r in enumerate(self.label.classes) if apply_rule(r, sentence[t]) == label]
        return float(max(vals)) if vals else -math.inf

    # -- persistence
    def save(self, path: str | Path, extra_meta: dict | None = None):
        meta = {
            "format_version": FORMAT_VERSION,
            "config": asdict(self.config),
            "vocab": sorted(self.vocab),
            "supertag": {"classes": self.supertag.classes, "features": self.supertag.features},
            "edge": {"classes": self.edge.classes, "features": self.edge.features,
                     "dense_dim": self.edge.dense_dim},
            "label": {"classes": self.label.classes, "features": self.label.features},
        }
        meta.update(extra_meta or {})
        arrays = {"supertag_W": self.supertag.W, "edge_W": self.edge.W, "label_W": self.label.W}
        if self.edge.D is not None:
            arrays["edge_D"] = self.edge.D
        with open(path, "wb") as fh:
            np.savez_compressed(fh, meta=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> tuple["Scorer", dict]:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("format_version") != FORMAT_VERSION:
                raise ValueError(f"unsupported model format {meta.get('format_version')}")
            sup = LinearClassifier(meta["supertag"]["classes"], meta["supertag"]["features"])
            sup.W = z["supertag_W"]
            edge = LinearClassifier(meta["edge"]["classes"], meta["edge"]["features"],
                                    meta["edge"]["dense_dim"])
            edge.W = z["edge_W"]
            if "edge_D" in z:
                edge.D = z["edge_D"]
            lab = LinearClassifier(meta["label"]["classes"], meta["label"]["features"])
            lab.W = z["label_W"]
        return cls(ScorerConfig(**meta["config"]), set(meta["vocab"]), sup, edge, lab), meta


def zero_scorer(shapes: Sequence[str], config: ScorerConfig | None = None) -> Scorer:
    config = config or ScorerConfig()
    dense = DIST_DIM if config.use_distance else 0
    return Scorer(config, set(), LinearClassifier([BOTTOM] + list(shapes), ["bias"]),
                  LinearClassifier(EDGE_CLASSES, ["bias"], dense),
                  LinearClassifier(["K|0:"], ["bias"]))


def train(items: Sequence[TrainingItem], config: ScorerConfig | None = None) -> Scorer:
    config = config or ScorerConfig()
    if not items:
        raise EmptyCorpus("no training items")
    counts = Counter(w.lower() for it in items for w in it.tokens)
    vocab = {w for w, c in counts.items() if c >= config.vocab_threshold}

    tag_classes = [BOTTOM] + sorted({k for it in items for k in it.supertags if k is not None})
    rules = sorted({label_rule(w, lab) for it in items
                    for w, lab in zip(it.tokens, it.labels) if lab is not None})

    tok_feats, edge_feats, pair_lists = [], [], []
    for it in items:
        forms = _forms(it.tokens, vocab)
        tok_feats.append([token_features(it.tokens, t, forms) for t in range(len(it.tokens))])
        n = len(it.tokens)
        pairs = [(h, d) for h in range(n) for d in range(n) if h != d]
        pair_lists.append(pairs)
        edge_feats.append([edge_features(it.tokens, h, d, config.use_distance, forms)
                           for h, d in pairs])

    def feature_list(groups):
        seen = {}
        for g in groups:
            for feats in g:
                for f in feats:
                    seen.setdefault(f, None)
        return list(seen)

    tok_vocab = feature_list(tok_feats)
    sup = LinearClassifier(tag_classes, tok_vocab)
    lab = LinearClassifier(rules or ["K|0:"], tok_vocab)
    edge = LinearClassifier(EDGE_CLASSES, feature_list(edge_feats),
                            DIST_DIM if config.use_distance else 0)

    data = []
    for it, tf, ef, pairs in zip(items, tok_feats, edge_feats, pair_lists):
        sb = sup.encode(tf)
        sy = np.array([sup.class_index[k if k is not None else BOTTOM] for k in it.supertags])
        lab_rows = [t for t, l in enumerate(it.labels) if l is not None]
        lb = lab.encode([tf[t] for t in lab_rows])
        ly = np.array([lab.class_index[label_rule(it.tokens[t], it.labels[t])] for t in lab_rows],
                      dtype=np.int64)
        dense = np.array([_dist_encode(h - d, DIST_DIM) for h, d in pairs]) if config.use_distance and pairs \
            else None
        eb = edge.encode(ef, dense)
        ey = np.array([edge.class_index[it.edges.get(p, NO_EDGE)] for p in pairs], dtype=np.int64)
        data.append((sb, sy, lb, ly, eb, ey))

    rng = np.random.default_rng(config.seed)
    trainers = [_Trainer(c, config.loss, config.lr, config.l2) for c in (sup, lab, edge)]
    for _ in range(config.epochs):
        for i in rng.permutation(len(data)):
            sb, sy, lb, ly, eb, ey = data[i]
            trainers[0].step(sb, sy)
            trainers[1].step(lb, ly)
            trainers[2].step(eb, ey)
    for t in trainers:
        t.finish()
    return Scorer(config, vocab, sup, edge, lab)
