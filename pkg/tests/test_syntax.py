import pytest
from hypothesis import given, strategies as st

from amcogs.corpus import LengthMismatch
from amcogs.syntax import (
    ConstTree, TreeSyntaxError, UnknownLabel, bracket_exact_match, coarsen, has_duplicate_unary,
    leaf, linearize, load_label_map, load_trees, node, parse_tree, prefix_label_map,
)

A_ROSE = node("NP", node("Det", "a"), node("N", "rose"))

FINE = ["NP", "NP_animate_dobj_noPP", "NP_inanimate_subj", "VP", "VP_external", "S", "Det", "N", "V"]
WORDS = ["a", "the", "rose", "cat", "saw", "Emma"]


@st.composite
def trees(draw, labels=FINE, depth=4):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        return node(draw(st.sampled_from(labels)), draw(st.sampled_from(WORDS)))
    kids = draw(st.lists(st.one_of(st.sampled_from(WORDS).map(leaf), trees(labels, depth - 1)),
                         min_size=1, max_size=3))
    return ConstTree(draw(st.sampled_from(labels)), kids)


def test_linearize_a_rose():
    assert linearize(A_ROSE) == "(NP (Det a) (N rose))"
    assert linearize(A_ROSE, labeled=False) == "((a)(rose))"
    assert linearize(leaf("leaf")) == "leaf" == linearize(leaf("leaf"), False)


def test_unlabeled_adjacent_leaves():
    t = node("VP", "ate", node("NP", "the", "cake"))
    assert linearize(t, labeled=False) == "(ate(the cake))"
    assert parse_tree("(ate(the cake))", labeled=False) == t.unlabeled()


def test_coarsen_fine_np_over_np():
    t = node("NP_animate_dobj_noPP", node("NP", node("Det", "a"), node("N", "rose")))
    out = coarsen(t, prefix_label_map(t.nonterminals()))
    assert out == A_ROSE


def test_coarsen_chain():
    t = node("X", node("X", node("X", "w")))
    assert coarsen(t, {"X": "X"}) == node("X", "w")


def test_coarsen_identity():
    t = node("S", node("NP", "Emma"), node("VP", node("V", "smiled")))
    assert coarsen(t, {x: x for x in t.nonterminals()}) == t


def test_chain_created_by_relabelling():
    t = node("NP_a", node("NP_b", node("NP", "x", "y")))
    assert coarsen(t, prefix_label_map(t.nonterminals())) == node("NP", "x", "y")


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        coarsen(A_ROSE, {"NP": "NP", "Det": "Det"})


@given(trees())
def test_coarsen_fixpoint_and_idempotent(t):
    m = prefix_label_map(FINE)
    once = coarsen(t, m)
    assert not has_duplicate_unary(once)
    assert coarsen(once, m) == once
    assert once.leaves() == t.leaves()


@given(trees())
def test_labeled_round_trip(t):
    assert parse_tree(linearize(t)) == t


@given(trees())
def test_unlabeled_round_trip(t):
    s = linearize(t, labeled=False)
    back = parse_tree(s, labeled=False)
    assert back == t.unlabeled()
    assert linearize(back, labeled=False) == s


def test_bracket_match_counts():
    gold = [A_ROSE, node("N", "cat"), node("V", "saw"), node("NP", node("N", "Emma"))]
    pred = list(gold)
    assert bracket_exact_match(gold, pred) == 1.0
    pred[1] = node("V", "cat")
    assert bracket_exact_match(gold, pred) == 0.75
    assert bracket_exact_match(gold, pred, labeled=False) == 1.0


def test_label_only_error():
    g, p = [A_ROSE], [node("NP", node("N", "a"), node("N", "rose"))]
    assert bracket_exact_match(g, p, labeled=True) == 0.0
    assert bracket_exact_match(g, p, labeled=False) == 1.0


def test_bracket_errors():
    with pytest.raises(LengthMismatch):
        bracket_exact_match([A_ROSE], [])
    assert bracket_exact_match([], []) == 0.0


@pytest.mark.parametrize("text", ["", "(NP a", "(NP a))", "()", "(NP)", "((a))x", ")"])
def test_parse_errors(text):
    with pytest.raises(TreeSyntaxError):
        parse_tree(text)


def test_labeled_form_needs_labels():
    with pytest.raises(ValueError):
        linearize(A_ROSE.unlabeled(), labeled=True)


def test_files(tmp_path):
    tp = tmp_path / "trees.txt"
    tp.write_text("(NP (Det a) (N rose))\n\n(N cat)\n")
    assert load_trees(tp) == [A_ROSE, node("N", "cat")]
    mp = tmp_path / "map.txt"
    mp.write_text("# fine coarse\nNP_animate NP\n\nVP_x VP\n")
    assert load_label_map(mp) == {"NP_animate": "NP", "VP_x": "VP"}
    mp.write_text("NP_animate\n")
    with pytest.raises(ValueError):
        load_label_map(mp)
