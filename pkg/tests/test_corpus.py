import json
import random

import pytest
from hypothesis import given, strategies as st

from amcogs.corpus import (
    CLASS_OF, CLASSES, GEN_TYPES, LEX, PROP, STRUCT, CorpusItem, FormatError, LengthMismatch,
    corpus_stats, diff_report, evaluate, exact_match, load_corpus, normalize, pp_depth, term_diff,
)

from fixtures import BABY_AM, BABY_GOLD, BABY_SEQ2SEQ, BALL_IN_BOWL, BOY_WANTED, SENTENCES


def items(pairs, gen="in_distribution"):
    return [CorpusItem(s.split(), lf, gen) for s, lf in pairs]


def test_gold_against_itself():
    gold = items(SENTENCES)
    rep = evaluate(gold, [it.lf for it in gold])
    assert rep.overall == 1.0 and rep.total == len(gold)


def test_both_wrong_baby_outputs_score_zero():
    gold = items([BABY_GOLD])
    assert evaluate(gold, [BABY_SEQ2SEQ]).overall == 0.0
    assert evaluate(gold, [BABY_AM]).overall == 0.0
    assert evaluate(gold, [BABY_GOLD[1]]).overall == 1.0


def test_class_partition():
    assert (len(STRUCT), len(PROP), len(LEX)) == (3, 2, 16)
    assert len(GEN_TYPES) == len(set(GEN_TYPES)) == 21
    assert {c for c in CLASS_OF.values()} == set(CLASSES)


def test_overall_is_weighted_mean():
    rng = random.Random(0)
    gold, preds = [], []
    sizes = {t: rng.randint(1, 40) for t in GEN_TYPES}
    for t, n in sizes.items():
        for i in range(n):
            lf = f"cat ( x _ {i} )"
            gold.append(CorpusItem(["a", "cat"], lf, t))
            preds.append(lf if rng.random() < rng.random() else "dog ( x _ 1 )")
    rep = evaluate(gold, preds)
    total = sum(sizes.values())
    weighted = sum(rep.per_type[t] * sizes[t] for t in GEN_TYPES) / total
    assert abs(rep.overall - weighted) <= 1e-12
    by_class = sum(rep.per_class[c] * rep.class_counts[c] for c in CLASSES) / total
    assert abs(rep.overall - by_class) <= 1e-12
    for c in CLASSES:
        members = [t for t in GEN_TYPES if CLASS_OF[t] == c]
        n = sum(sizes[t] for t in members)
        assert rep.class_counts[c] == n
        assert rep.per_class[c] == pytest.approx(sum(rep.correct[t] for t in members) / n, abs=1e-12)


def test_in_distribution_has_no_class():
    rep = evaluate(items([BOY_WANTED]), [BOY_WANTED[1]])
    assert rep.per_class == {} and rep.per_type == {"in_distribution": 1.0}


def test_strict_and_normalized_matching():
    g = BOY_WANTED[1]
    assert exact_match(g, g + " ")
    assert not exact_match(g, g + " ", strict=True)
    assert exact_match(g, g.replace(" ; ", "  ;  "))
    # reordering conjuncts is never credited
    a, b = "cat ( x _ 1 ) AND dog ( x _ 2 )", "dog ( x _ 2 ) AND cat ( x _ 1 )"
    assert not exact_match(a, b)


@given(st.text("ab ()_;", max_size=20), st.text("ab ()_;", max_size=20), st.booleans())
def test_exact_match_symmetric(a, b, strict):
    assert exact_match(a, b, strict) == exact_match(b, a, strict)
    assert exact_match(a, a, strict)


@given(st.text("ab \t", max_size=20))
def test_normalize_idempotent(a):
    assert normalize(normalize(a)) == normalize(a)


def test_pp_depth():
    assert pp_depth(BALL_IN_BOWL[1]) == 2
    assert pp_depth(BABY_GOLD[1]) == 2
    assert pp_depth(BOY_WANTED[1]) == 0


def test_depth_curve_uses_pp_items_only():
    gold = items([BALL_IN_BOWL], "pp_recursion") + items([BABY_GOLD], "obj_pp_to_subj_pp")
    rep = evaluate(gold, [BALL_IN_BOWL[1], ""])
    assert rep.pp_depth_curve == {2: 1.0} and rep.depth_counts == {2: 1}


def test_reports():
    gold = items([BALL_IN_BOWL], "pp_recursion") + items([BOY_WANTED], "subj_to_obj_common")
    rep = evaluate(gold, [BALL_IN_BOWL[1], ""])
    d = json.loads(rep.to_json())
    assert d["overall"] == 0.5 and d["per_class"] == {"Struct": 1.0, "Lex": 0.0}
    assert d["pp_depth_curve"] == {"2": 1.0}
    rows = rep.to_csv().splitlines()
    assert rows[0] == "group,name,count,accuracy" and rows[1] == "overall,all,2,0.5"
    assert "type,pp_recursion,1,1.0" in rows
    assert rep.depth_csv().splitlines() == ["depth,accuracy", "2,1.0"]


def test_empty_evaluation():
    rep = evaluate([], [])
    assert rep.overall == 0.0 and rep.total == 0


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        evaluate(items([BOY_WANTED]), [])
    with pytest.raises(LengthMismatch):
        diff_report(items([BOY_WANTED]), ["a", "b"])


def test_load_corpus(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text(f"{BOY_WANTED[0]}\t{BOY_WANTED[1]}\tin_distribution\n\n"
                 f"{BALL_IN_BOWL[0]}\t{BALL_IN_BOWL[1]}\tpp_recursion\r\n")
    got = load_corpus(p)
    assert [it.gen_type for it in got] == ["in_distribution", "pp_recursion"]
    assert got[1].lf == BALL_IN_BOWL[1] and got[0].tokens == BOY_WANTED[0].split()
    assert corpus_stats(got) == {"items": 2, "per_type": {"in_distribution": 1, "pp_recursion": 1}}


def test_format_error(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text(f"{BOY_WANTED[0]}\t{BOY_WANTED[1]}\tin_distribution\nno tabs here\n")
    with pytest.raises(FormatError) as info:
        load_corpus(p)
    assert info.value.line == 2


def test_term_diff_baby():
    d = term_diff(BABY_GOLD[1], BABY_AM)
    changed = [t for t in d if t.kind == "changed"]
    assert {t.gold for t in changed} == {"tray.nmod.in(x_4,x_7)", "scream.agent(x_8,x_1)"}
    assert [t.positions for t in changed] == [(1,), (1,)]
    d2 = term_diff(BABY_GOLD[1], BABY_SEQ2SEQ)
    kinds = sorted(t.kind for t in d2)
    assert kinds == ["changed", "extra", "missing"]
    assert term_diff(BABY_GOLD[1], BABY_GOLD[1]) == []


def test_term_diff_unparseable():
    d = term_diff(BABY_GOLD[1], "garbage (")
    assert len(d) == 1 and d[0].positions == (-1,)


def test_diff_report_limits():
    gold = items([BOY_WANTED, BALL_IN_BOWL, BABY_GOLD])
    rep = diff_report(gold, ["", BALL_IN_BOWL[1], BABY_AM], n=5)
    assert [r.index for r in rep] == [0, 2]
    assert len(diff_report(gold, ["", "", ""], n=1)) == 1
    assert rep[1].render().startswith("#2: The baby")
