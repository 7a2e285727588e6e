"""Seeded generator for a small COGS-style corpus.

Sentences are assembled left to right from templates; the logical form is
built alongside from the token positions, so every item converts to a
graph by construction.  Prepositional chains only hang off the last NP of
a sentence and always attach to the noun immediately on their left.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .lf import Arg, LogicalForm, Term, canonical_order, name_positions, print_lf

NOUNS = ["boy", "girl", "cat", "dog", "baby", "cake", "ball", "bowl", "table", "box",
         "house", "tray", "cookie", "bottle", "plate", "car", "chair", "bed", "hat", "cup",
         "lion", "mouse", "donut", "pencil", "room", "shelf", "basket", "bag", "rose", "book"]
NAMES = ["Ava", "Ben", "Claire", "Emma", "Liam", "Noah", "Olivia", "Mia", "Lucas", "Zoe"]
PREPOSITIONS = ["in", "on", "beside"]

# lemma: (past, participle)
TRANSITIVE = {"see": ("saw", "seen"), "like": ("liked", "liked"), "eat": ("ate", "eaten"),
              "find": ("found", "found"), "touch": ("touched", "touched"),
              "help": ("helped", "helped"), "paint": ("painted", "painted"),
              "take": ("took", "taken")}
UNERGATIVE = {"sleep": "slept", "smile": "smiled", "dance": "danced", "laugh": "laughed"}
UNACCUSATIVE = {"roll": "rolled", "break": "broke", "shatter": "shattered"}
DITRANSITIVE = {"give": ("gave", "given"), "lend": ("lended", "lended"),
                "send": ("sent", "sent"), "offer": ("offered", "offered")}
CONTROL = {"want": "wanted", "try": "tried", "intend": "intended"}
CP_VERBS = {"say": "said", "know": "knew", "think": "thought", "declare": "declared"}
INF_INTRANSITIVE = ["go", "sleep", "smile", "dance"]
INF_TRANSITIVE = ["eat", "see", "touch", "paint"]


class ConfigError(ValueError):
    pass


@dataclass
class MiniConfig:
    train_size: int = 1500
    dev_size: int = 200
    gen_per_depth: int = 50
    max_train_pp_depth: int = 2
    gen_pp_depths: tuple[int, ...] = (3, 4, 5, 6)
    max_train_cp_depth: int = 2
    gen_cp_depths: tuple[int, ...] = (3,)
    primitives: bool = True
    seed: int = 42

    def validate(self):
        if self.train_size < 0 or self.dev_size < 0 or self.gen_per_depth < 0:
            raise ConfigError("sizes must be non-negative")
        if self.max_train_pp_depth < 0 or self.max_train_cp_depth < 0:
            raise ConfigError("depths must be non-negative")
        for d in self.gen_pp_depths:
            if d <= self.max_train_pp_depth:
                raise ConfigError(f"generalization PP depth {d} is not beyond training depth "
                                  f"{self.max_train_pp_depth}")
        for d in self.gen_cp_depths:
            if d <= self.max_train_cp_depth:
                raise ConfigError(f"generalization CP depth {d} is not beyond training depth "
                                  f"{self.max_train_cp_depth}")


@dataclass
class MiniItem:
    tokens: list[str]
    lf: LogicalForm
    gen_type: str = "in_distribution"

    @property
    def sentence(self) -> str:
        return " ".join(self.tokens)

    def tsv(self) -> str:
        return f"{self.sentence}\t{print_lf(self.lf)}\t{self.gen_type}"


@dataclass
class _Builder:
    rng: random.Random
    tokens: list[str] = field(default_factory=list)
    iota: list[Term] = field(default_factory=list)
    conj: list[Term] = field(default_factory=list)

    def word(self, w: str) -> int:
        self.tokens.append(w)
        return len(self.tokens) - 1

    def np(self, pp_depth: int = 0, allow_name: bool = True) -> Arg:
        if allow_name and pp_depth == 0 and self.rng.random() < 0.35:
            name = self.rng.choice([n for n in NAMES if n not in self.tokens])
            return Arg.name(name, self.word(name))
        head = self._common_np()
        x = head
        for _ in range(pp_depth):
            p = self.rng.choice(PREPOSITIONS)
            self.word(p)
            y = self._common_np()
            self.conj.append(Term((self.tokens[x], "nmod", p), (Arg.var(x), Arg.var(y))))
            x = y
        return Arg.var(head)

    def _common_np(self) -> int:
        det = self.rng.choice(["a", "the"])
        self.word(det)
        i = self.word(self.rng.choice(NOUNS))
        term = Term((self.tokens[i],), (Arg.var(i),))
        (self.iota if det == "the" else self.conj).append(term)
        return i

    def role(self, lemma: str, v: int, role: str, arg: Arg):
        self.conj.append(Term((lemma, role), (Arg.var(v), arg)))


# clause kinds whose last word is an NP that may carry a PP chain
_PP_FRIENDLY = ("transitive", "ditransitive_do", "passive_recipient", "control_transitive")
_ALL_KINDS = _PP_FRIENDLY + ("unergative", "unaccusative", "ditransitive_pp", "passive",
                             "passive_by", "control_intransitive", "unacc_transitive")


def _clause(b: _Builder, kind: str, pp: int) -> int:
    """Append one clause and return the token index of its main verb."""
    r = b.rng
    if kind == "transitive":
        lemma = r.choice(sorted(TRANSITIVE))
        s = b.np()
        v = b.word(TRANSITIVE[lemma][0])
        o = b.np(pp)
        b.role(lemma, v, "agent", s)
        b.role(lemma, v, "theme", o)
    elif kind == "unacc_transitive":
        lemma = r.choice(sorted(UNACCUSATIVE))
        s = b.np()
        v = b.word(UNACCUSATIVE[lemma])
        o = b.np(pp)
        b.role(lemma, v, "agent", s)
        b.role(lemma, v, "theme", o)
    elif kind == "unergative":
        lemma = r.choice(sorted(UNERGATIVE))
        s = b.np()
        v = b.word(UNERGATIVE[lemma])
        b.role(lemma, v, "agent", s)
    elif kind == "unaccusative":
        lemma = r.choice(sorted(UNACCUSATIVE))
        s = b.np()
        v = b.word(UNACCUSATIVE[lemma])
        b.role(lemma, v, "theme", s)
    elif kind == "ditransitive_do":
        lemma = r.choice(sorted(DITRANSITIVE))
        s = b.np()
        v = b.word(DITRANSITIVE[lemma][0])
        rec = b.np()
        th = b.np(pp, allow_name=False)
        b.role(lemma, v, "agent", s)
        b.role(lemma, v, "recipient", rec)
        b.role(lemma, v, "theme", th)
    elif kind == "ditransitive_pp":
        lemma = r.choice(sorted(DITRANSITIVE))
        s = b.np()
        v = b.word(DITRANSITIVE[lemma][0])
        th = b.np(allow_name=False)
        b.word("to")
        rec = b.np(allow_name=True)
        b.role(lemma, v, "agent", s)
        b.role(lemma, v, "theme", th)
        b.role(lemma, v, "recipient", rec)
    elif kind in ("passive", "passive_by"):
        lemma = r.choice(sorted(TRANSITIVE))
        s = b.np()
        b.word("was")
        v = b.word(TRANSITIVE[lemma][1])
        b.role(lemma, v, "theme", s)
        if kind == "passive_by":
            b.word("by")
            b.role(lemma, v, "agent", b.np())
    elif kind == "passive_recipient":
        lemma = r.choice(sorted(DITRANSITIVE))
        s = b.np()
        b.word("was")
        v = b.word(DITRANSITIVE[lemma][1])
        th = b.np(pp, allow_name=False)
        b.role(lemma, v, "recipient", s)
        b.role(lemma, v, "theme", th)
    elif kind in ("control_intransitive", "control_transitive"):
        lemma = r.choice(sorted(CONTROL))
        s = b.np()
        v = b.word(CONTROL[lemma])
        b.word("to")
        if kind == "control_intransitive":
            inf = r.choice(INF_INTRANSITIVE)
            v2 = b.word(inf)
        else:
            inf = r.choice(INF_TRANSITIVE)
            v2 = b.word(inf)
            b.role(inf, v2, "theme", b.np(pp))
        b.role(lemma, v, "agent", s)
        b.role(lemma, v, "xcomp", Arg.var(v2))
        b.role(inf, v2, "agent", s)
    else:
        raise ConfigError(f"unknown clause kind {kind!r}")
    return v


def _sentence(rng: random.Random, cp_depth: int, pp_depth: int, kind: str | None = None) -> MiniItem:
    b = _Builder(rng)
    cp_verbs = []
    for _ in range(cp_depth):
        lemma = rng.choice(sorted(CP_VERBS))
        s = b.np()
        v = b.word(CP_VERBS[lemma])
        b.role(lemma, v, "agent", s)
        b.word("that")
        cp_verbs.append((lemma, v))
    if kind is None:
        kind = rng.choice(_PP_FRIENDLY if pp_depth else _ALL_KINDS)
    heads = [v for _, v in cp_verbs] + [_clause(b, kind, pp_depth)]
    for (lemma, v), v2 in zip(cp_verbs, heads[1:]):
        b.role(lemma, v, "ccomp", Arg.var(v2))
    b.word(".")
    b.tokens[0] = b.tokens[0][0].upper() + b.tokens[0][1:]
    lf = canonical_order(LogicalForm(b.iota, b.conj), name_positions(b.tokens))
    return MiniItem(b.tokens, lf)


def _primitives() -> list[MiniItem]:
    from .lf import parse_lf
    items = []
    for n in NOUNS:
        items.append(MiniItem([n], parse_lf(f"LAMBDA a . {n} ( a )"), "primitive"))
    for n in NAMES:
        items.append(MiniItem([n], parse_lf(n), "primitive"))
    for v in sorted(TRANSITIVE):
        items.append(MiniItem([v], parse_lf(
            f"LAMBDA a . LAMBDA b . LAMBDA e . {v} . agent ( e , b ) AND {v} . theme ( e , a )"),
            "primitive"))
    for v in sorted(UNERGATIVE):
        items.append(MiniItem([v], parse_lf(f"LAMBDA a . LAMBDA e . {v} . agent ( e , a )"),
                              "primitive"))
    return items


def _train_sentence(rng: random.Random, cfg: MiniConfig) -> MiniItem:
    cp = rng.choices(range(cfg.max_train_cp_depth + 1),
                     weights=[6] + [1] * cfg.max_train_cp_depth)[0]
    pp_weights = [2] + [1] * cfg.max_train_pp_depth
    pp = rng.choices(range(cfg.max_train_pp_depth + 1), weights=pp_weights)[0]
    return _sentence(rng, cp, pp)


def generate(cfg: MiniConfig | None = None) -> dict[str, list[MiniItem]]:
    cfg = cfg or MiniConfig()
    cfg.validate()
    rng = random.Random(cfg.seed)
    train = [_train_sentence(rng, cfg) for _ in range(cfg.train_size)]
    if cfg.primitives:
        train += _primitives()
    dev = [_train_sentence(rng, cfg) for _ in range(cfg.dev_size)]
    gen = []
    for d in cfg.gen_pp_depths:
        for _ in range(cfg.gen_per_depth):
            item = _sentence(rng, 0, d)
            item.gen_type = "pp_recursion"
            gen.append(item)
    for d in cfg.gen_cp_depths:
        for _ in range(cfg.gen_per_depth):
            item = _sentence(rng, d, 0)
            item.gen_type = "cp_recursion"
            gen.append(item)
    return {"train": train, "dev": dev, "gen": gen}


def write_corpus(splits: dict[str, list[MiniItem]], out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, items in splits.items():
        p = out / f"{name}.tsv"
        p.write_text("".join(it.tsv() + "\n" for it in items), encoding="utf-8")
        paths[name] = p
    return paths
