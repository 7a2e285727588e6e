import json
import subprocess
import sys

import pytest

from amcogs.cli import main
from amcogs.corpus import load_corpus


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-mini", str(d), "--train-size", "300", "--dev-size", "20", "--gen-per-depth", "3"]) == 0
    assert main(["train", str(d / "train.tsv"), "-m", str(d / "model.npz"), "--epochs", "5"]) == 0
    return d


def test_convert_check(work, capsys):
    assert main(["convert", str(work / "dev.tsv"), "--check"]) == 0
    assert ", 0 failures" in capsys.readouterr().err


def test_convert_writes_graphs(work):
    out = work / "graphs.txt"
    assert main(["convert", str(work / "dev.tsv"), "-o", str(out)]) == 0
    assert out.read_text().strip()


def test_decompose(work, capsys):
    lex = work / "lex.txt"
    assert main(["decompose", str(work / "dev.tsv"), "--lexicon", str(lex)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# 0 ") and "# supertags" in out
    assert lex.read_text().strip()


def test_parse_eval_diff(work, capsys):
    pred = work / "pred.tsv"
    assert main(["parse", str(work / "dev.tsv"), "-m", str(work / "model.npz"), "-o", str(pred)]) == 0
    got = load_corpus(pred)
    assert len(got) == 20 and all(p.lf for p in got)
    js = work / "rep.json"
    assert main(["eval", str(work / "dev.tsv"), str(pred), "--json", str(js),
                 "--csv", str(work / "rep.csv"), "--depth-csv", str(work / "depth.csv")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("overall\t")
    rep = json.loads(js.read_text())
    # a small model; this only checks the plumbing, accuracy is tested elsewhere
    assert rep["total"] == 20 and rep["overall"] >= 0.5
    assert main(["diff", str(work / "dev.tsv"), str(pred), "-n", "2"]) == 0


def test_parse_exhaustive_margin(work):
    pred = work / "pred_all.tsv"
    assert main(["parse", str(work / "gen.tsv"), "-m", str(work / "model.npz"), "--margin", "-1",
                 "-o", str(pred)]) == 0
    assert len(load_corpus(pred)) == len(load_corpus(work / "gen.tsv"))


def test_eval_self_is_perfect(work, capsys):
    assert main(["eval", str(work / "gen.tsv"), str(work / "gen.tsv")]) == 0
    assert capsys.readouterr().out.startswith("overall\t1.0000")


def test_length_mismatch_exit_code(work, capsys):
    assert main(["eval", str(work / "dev.tsv"), str(work / "gen.tsv")]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["eval", str(tmp_path / "nope.tsv"), str(tmp_path / "nope.tsv")]) == 2


def test_bad_format(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("only one field\n")
    assert main(["convert", str(p)]) == 2


def test_syntax_eval(tmp_path, capsys):
    g, p = tmp_path / "g.txt", tmp_path / "p.txt"
    g.write_text("(NP_animate (NP (Det a) (N rose)))\n(N cat)\n")
    p.write_text("(NP (Det a) (N rose))\n(V cat)\n")
    assert main(["syntax-eval", str(g), str(p), "--prefix-map"]) == 0
    assert capsys.readouterr().out.splitlines() == ["labeled\t0.5000", "unlabeled\t1.0000"]
    assert main(["syntax-eval", str(g), str(p)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "labeled\t0.0000"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "amcogs", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("convert", "decompose", "train", "parse", "eval", "diff", "syntax-eval", "gen-mini"):
        assert cmd in r.stdout
