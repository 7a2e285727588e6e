import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from amcogs.algebra import Op
from amcogs.convert import lf_to_graph
from amcogs.decoder import decode
from amcogs.decompose import decompose
from amcogs.lf import parse_lf
from amcogs.minigen import MiniConfig, generate
from amcogs.pipeline import DEFAULT_K, DEFAULT_MARGIN, prepare
from amcogs.scorer import (
    BOTTOM, DIST_DIM, NO_EDGE, Batch, EmptyCorpus, Scorer, ScorerConfig, apply_rule, dist_encode,
    edge_features, label_rule, logistic_loss_and_grad, sparse_scores, token_features, train,
    training_item, zero_scorer,
)

from fixtures import BALL_IN_BOWL


@pytest.fixture(scope="module")
def prepared():
    return prepare(generate(MiniConfig(dev_size=0, gen_per_depth=0,
                                       gen_pp_depths=(), gen_cp_depths=()))["train"])


@pytest.fixture(scope="module")
def model(prepared):
    return train(prepared.items, ScorerConfig())


# --- distance encoding -------------------------------------------------------

def test_zero_distance_alternates():
    v = dist_encode(4, 4)
    assert v.shape == (DIST_DIM,)
    assert np.all(v[0::2] == 0.0) and np.all(v[1::2] == 1.0)


def test_first_component():
    assert dist_encode(3, 2)[0] == pytest.approx(0.8414709848, abs=1e-10)


@pytest.mark.parametrize("d", [-17, -3, -1, 1, 2, 5, 11, 40])
def test_matches_direct_formula(d):
    v = dist_encode(d, 0)
    for k in range(DIST_DIM // 2):
        angle = d / 10000 ** (2 * k / DIST_DIM)
        assert abs(v[2 * k] - math.sin(angle)) < 1e-12
        assert abs(v[2 * k + 1] - math.cos(angle)) < 1e-12


@given(st.integers(-30, 30), st.integers(-30, 30))
def test_swap_flips_sines(i, j):
    a, b = dist_encode(i, j), dist_encode(j, i)
    assert np.allclose(a[0::2], -b[0::2], atol=1e-15)
    assert np.allclose(a[1::2], b[1::2], atol=1e-15)


def test_injective_on_small_distances():
    vecs = [dist_encode(d, 0) for d in range(-20, 21)]
    for x in range(len(vecs)):
        for y in range(x + 1, len(vecs)):
            assert np.abs(vecs[x] - vecs[y]).max() > 1e-9


# --- logistic gradient -------------------------------------------------------

def _random_case(rng):
    n_feat, n_cls, n_ex, dense_dim = rng.integers(2, 8), rng.integers(2, 5), rng.integers(1, 6), rng.integers(0, 4)
    rows = [rng.choice(n_feat, size=rng.integers(1, n_feat + 1), replace=False) for _ in range(n_ex)]
    offsets = np.cumsum([0] + [len(r) for r in rows])
    dense = rng.normal(size=(n_ex, dense_dim)) if dense_dim else None
    batch = Batch(np.concatenate(rows).astype(np.int64), offsets.astype(np.int64), dense)
    W = rng.normal(size=(n_feat, n_cls))
    D = rng.normal(size=(dense_dim, n_cls)) if dense_dim else None
    y = rng.integers(0, n_cls, size=n_ex)
    return W, D, batch, y, float(rng.choice([0.0, 0.1]))


def _rel_err(a, b):
    return abs(a - b) / max(1e-8, abs(a), abs(b))


def test_logistic_gradient_central_differences():
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(100):
        W, D, batch, y, l2 = _random_case(rng)
        _, gW, gD = logistic_loss_and_grad(W, D, batch, y, l2)
        for idx in np.ndindex(W.shape):
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += h
            Wm[idx] -= h
            num = (logistic_loss_and_grad(Wp, D, batch, y, l2)[0]
                   - logistic_loss_and_grad(Wm, D, batch, y, l2)[0]) / (2 * h)
            assert abs(num - gW[idx]) < 1e-9 or _rel_err(num, gW[idx]) < 1e-5
        if D is not None:
            for idx in np.ndindex(D.shape):
                Dp, Dm = D.copy(), D.copy()
                Dp[idx] += h
                Dm[idx] -= h
                num = (logistic_loss_and_grad(W, Dp, batch, y, l2)[0]
                       - logistic_loss_and_grad(W, Dm, batch, y, l2)[0]) / (2 * h)
                assert abs(num - gD[idx]) < 1e-9 or _rel_err(num, gD[idx]) < 1e-5


def test_sparse_scores_empty_rows():
    W = np.arange(6.0).reshape(3, 2)
    batch = Batch(np.array([2, 0], dtype=np.int64), np.array([0, 0, 2, 2], dtype=np.int64))
    assert sparse_scores(W, None, batch).tolist() == [[0, 0], [4, 6], [0, 0]]
    empty = Batch(np.zeros(0, dtype=np.int64), np.array([0], dtype=np.int64))
    assert sparse_scores(W, None, empty).shape == (0, 2)


# --- label rules -------------------------------------------------------------

@pytest.mark.parametrize("form,label", [("saw", "see"), ("Emma", "Emma"), ("The", "the"),
                                        ("lended", "lend"), ("cats", "cat"), ("ate", "eat")])
def test_label_rules(form, label):
    assert apply_rule(label_rule(form, label), form) == label


@given(st.text("abcdeAB", min_size=1, max_size=8), st.text("abcde", min_size=1, max_size=8))
def test_label_rule_inverts(form, label):
    assert apply_rule(label_rule(form, label), form) == label


# --- features ----------------------------------------------------------------

def test_features_are_relative():
    sent = BALL_IN_BOWL[0].split()
    pad = ["Ben", "said", "that"] + sent
    k = 3
    for t in range(2, len(sent)):
        assert token_features(sent, t) == token_features(pad, t + k)
    for h in range(1, len(sent)):
        for d in range(len(sent)):
            if d != h:
                assert edge_features(sent, h, d, True) == edge_features(pad, h + k, d + k, True)


def test_single_occurrence_word_keeps_features(prepared):
    item = prepared.items[0]
    odd = replace(item, tokens=["Zorblax"] + item.tokens[1:])
    m = train([odd] + prepared.items[:20], ScorerConfig(epochs=1, vocab_threshold=1))
    assert "zorblax" in m.vocab
    assert "w=zorblax" in m.supertag.feature_index
    m7 = train([odd] + prepared.items[:20], ScorerConfig(epochs=1, vocab_threshold=7))
    assert "zorblax" not in m7.vocab


# --- models ------------------------------------------------------------------

def test_zero_model_scores_zero():
    m = zero_scorer(["[]{}", "[iota>S0]{S0}"])
    sent = ["the", "cat", "."]
    assert np.all(m.supertag_scores(sent) == 0)
    assert m.score_edge(sent, 1, 0, "MOD_S0") == 0
    assert m.score_supertag(sent, 1, "[]{}") == 0
    assert m.score_label(sent, 1, "cat") == 0


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train([])


def test_training_is_deterministic(prepared):
    a = train(prepared.items[:100], ScorerConfig(epochs=3, seed=5))
    b = train(prepared.items[:100], ScorerConfig(epochs=3, seed=5))
    for x, y in ((a.supertag, b.supertag), (a.edge, b.edge), (a.label, b.label)):
        assert x.features == y.features
        assert np.array_equal(x.W, y.W)
    assert np.array_equal(a.edge.D, b.edge.D)


def test_gold_edges_outscore_wrong_ones(prepared, model):
    # a wrong edge competes with the gold one for the same dependent
    good = total = 0
    for it in prepared.items:
        n = len(it.tokens)
        if n < 2:
            continue
        es = model.edge_scores(it.tokens)
        for (h, d), op in it.edges.items():
            gold_op = Op.parse(op)
            wrong = max(m[hh, d] for o, m in es.items() for hh in range(n) if (o, hh) != (gold_op, h))
            good += es[gold_op][h, d] > wrong
            total += 1
    assert good / total >= 0.99


def test_training_trees_rederived(prepared, model):
    ok = 0
    for it in prepared.items:
        if len(it.tokens) == 1:
            ok += 1 if model.supertag.classes[model.supertag_scores(it.tokens)[0].argmax()] == it.supertags[0] else 0
            continue
        res = decode(model, prepared.lexicon, it.tokens, DEFAULT_K, DEFAULT_MARGIN)
        edges = {(e.head, e.dep): str(e.op) for e in res.tree.edges}
        keys = [t.key if t is not None else None for t in res.supertags]
        ok += edges == it.edges and keys == it.supertags and res.labels == it.labels
    assert ok / len(prepared.items) >= 0.99


def test_supertags_and_labels_fit_training_data(prepared, model):
    tag_ok = lab_ok = tags = labs = 0
    for it in prepared.items:
        pred = model.supertag_scores(it.tokens).argmax(axis=1)
        best = model.best_labels(it.tokens)
        for t, key in enumerate(it.supertags):
            tags += 1
            tag_ok += model.supertag.classes[pred[t]] == (key or BOTTOM)
            if it.labels[t] is not None:
                labs += 1
                lab_ok += best[t][0] == it.labels[t]
    assert tag_ok / tags >= 0.99
    assert lab_ok / labs >= 0.99


def test_distance_features_change_edge_scores():
    sent, text = BALL_IN_BOWL
    tokens = sent.split()
    d = decompose(lf_to_graph(parse_lf(text), tokens))
    item = training_item(tokens, d)
    with_d = train([item], ScorerConfig(epochs=2, use_distance=True))
    without = train([item], ScorerConfig(epochs=2, use_distance=False))
    # "in" attaching to "ball" versus to "saw"
    a = with_d.edge_scores(tokens)[Op.parse("MOD_S0")]
    b = without.edge_scores(tokens)[Op.parse("MOD_S0")]
    assert (a[3, 4] - a[1, 4]) != (b[3, 4] - b[1, 4])
    assert without.edge.D is None and with_d.edge.D.shape[0] == DIST_DIM


def test_edge_scores_are_margins(model):
    tokens = BALL_IN_BOWL[0].split()
    es = model.edge_scores(tokens)
    assert all(np.isneginf(m[i, i]) for m in es.values() for i in range(len(tokens)))
    raw = model.edge.scores(model._edge_batch(tokens, [(3, 4)]))[0]
    none = raw[model.edge.class_index[NO_EDGE]]
    op = Op.parse("MOD_S0")
    assert es[op][3, 4] == pytest.approx(raw[model.edge.class_index[str(op)]] - none)
    assert model.score_edge(tokens, 3, 4, op) == pytest.approx(es[op][3, 4])


def test_save_load(tmp_path, model):
    path = tmp_path / "m.npz"
    model.save(path, {"note": "x"})
    back, meta = Scorer.load(path)
    assert meta["note"] == "x"
    tokens = BALL_IN_BOWL[0].split()
    assert np.array_equal(back.supertag_scores(tokens), model.supertag_scores(tokens))
    for op, m in model.edge_scores(tokens).items():
        assert np.array_equal(back.edge_scores(tokens)[op], m)
    assert back.best_labels(tokens) == model.best_labels(tokens)


def test_logistic_training_runs(prepared):
    m = train(prepared.items[:80], ScorerConfig(epochs=3, loss="logistic", lr=0.5))
    it = prepared.items[0]
    assert np.isfinite(m.supertag_scores(it.tokens)).all()


def test_unknown_loss():
    with pytest.raises(ValueError):
        ScorerConfig(loss="hinge")
