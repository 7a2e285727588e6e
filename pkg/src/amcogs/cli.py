"""Command-line interface: ``amcogs <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import corpus as ce
from .algebra import IllTyped
from .convert import ConversionError, graph_to_lf, lf_to_graph
from .decompose import NonDecomposable, SupertagLexicon
from .graph import dump_graph
from .lf import LfError, parse_lf, print_lf
from .pipeline import DEFAULT_K, DEFAULT_MARGIN, MAX_K, decompose_item, predict, train_model
from .scorer import Scorer, ScorerConfig

log = logging.getLogger("amcogs")


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_convert(args) -> int:
    items = ce.load_corpus(args.input)
    out, bad = [], 0
    t0 = time.perf_counter()
    for i, it in enumerate(items):
        try:
            lf = parse_lf(it.lf)
            if lf.is_primitive:
                continue
            g = lf_to_graph(lf, it.tokens)
            back = print_lf(graph_to_lf(g, it.tokens), args.format)
        except (LfError, ConversionError) as exc:
            bad += 1
            log.error("item %d: %s", i, exc)
            continue
        if args.check:
            if not ce.exact_match(print_lf(lf, args.format), back):
                bad += 1
                out.append(f"{i}\tMISMATCH\t{back}\n")
        else:
            out.append(f"# {i} {it.sentence}\n{dump_graph(g.graph)}\n")
    _write(args.out, "".join(out))
    print(f"{len(items)} items, {bad} failures, {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 1 if bad else 0


def cmd_decompose(args) -> int:
    items = ce.load_corpus(args.input)
    lex = SupertagLexicon()
    trees, bad = [], 0
    for i, it in enumerate(items):
        try:
            d = decompose_item(it.tokens, it.lf)
        except (LfError, ConversionError, NonDecomposable, IllTyped) as exc:
            bad += 1
            log.error("item %d: %s", i, exc)
            continue
        lex.add(d)
        tags = " ".join(str(t) if t else "_" for t in d.supertags)
        trees.append(f"# {i} {it.sentence}\n# supertags {tags}\n{d.tree.dumps()}\n")
    _write(args.trees, "".join(trees))
    if args.lexicon:
        Path(args.lexicon).write_text(lex.dumps(), encoding="utf-8")
    print(f"{len(items)} items, {bad} failures, {len(lex)} supertag shapes", file=sys.stderr)
    return 1 if bad else 0


def cmd_train(args) -> int:
    items = ce.load_corpus(args.train)
    cfg = ScorerConfig(epochs=args.epochs, lr=args.lr, loss=args.loss,
                       vocab_threshold=args.vocab_threshold, use_distance=args.dist,
                       l2=args.l2, seed=args.seed)
    t0 = time.perf_counter()
    model, lex, prep = train_model(items, cfg)
    model.save(args.model, {"lexicon": lex.dumps()})
    if args.lexicon_out:
        Path(args.lexicon_out).write_text(lex.dumps(), encoding="utf-8")
    print(f"trained on {len(prep.items)} items ({len(prep.skipped)} skipped), "
          f"{len(lex)} shapes, {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 0


def _load_model(args):
    model, meta = Scorer.load(args.model)
    if args.lexicon:
        lex = SupertagLexicon.loads(Path(args.lexicon).read_text(encoding="utf-8"))
    elif "lexicon" in meta:
        lex = SupertagLexicon.loads(meta["lexicon"])
    else:
        raise SystemExit("model has no embedded lexicon; pass --lexicon")
    return model, lex


def cmd_parse(args) -> int:
    model, lex = _load_model(args)
    items = ce.load_corpus(args.input)
    margin = None if args.margin < 0 else args.margin
    lines, empty = [], 0
    t0 = time.perf_counter()
    for it in items:
        pred = predict(model, lex, it.tokens, args.k, margin, args.max_k, args.format)
        empty += not pred
        lines.append(f"{it.sentence}\t{pred}\t{it.gen_type}\n")
    _write(args.out, "".join(lines))
    print(f"{len(items)} sentences, {empty} without parse, {time.perf_counter() - t0:.1f}s",
          file=sys.stderr)
    return 0


def _gold_and_preds(args):
    gold = ce.load_corpus(args.gold)
    pred = ce.load_corpus(args.pred)
    if len(gold) != len(pred):
        raise ce.LengthMismatch(f"{len(gold)} gold items but {len(pred)} predictions")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.tokens != p.tokens:
            log.warning("item %d: sentences differ", i)
    return gold, [p.lf for p in pred]


def cmd_eval(args) -> int:
    gold, preds = _gold_and_preds(args)
    rep = ce.evaluate(gold, preds, args.strict_match)
    if args.json:
        Path(args.json).write_text(rep.to_json() + "\n", encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(rep.to_csv(), encoding="utf-8")
    if args.depth_csv:
        Path(args.depth_csv).write_text(rep.depth_csv(), encoding="utf-8")
    print(f"overall\t{rep.overall:.4f}\t({rep.total} items)")
    for c, acc in rep.per_class.items():
        print(f"class\t{c}\t{acc:.4f}")
    for t, acc in rep.per_type.items():
        print(f"type\t{t}\t{acc:.4f}")
    for d, acc in rep.pp_depth_curve.items():
        print(f"pp_depth\t{d}\t{acc:.4f}")
    return 0


def cmd_diff(args) -> int:
    gold, preds = _gold_and_preds(args)
    for d in ce.diff_report(gold, preds, args.n, args.strict_match):
        print(d.render())
        print()
    return 0


def cmd_syntax_eval(args) -> int:
    from .syntax import bracket_exact_match, coarsen, load_label_map, load_trees, prefix_label_map

    gold = load_trees(args.gold, labeled=not args.unlabeled_input)
    pred = load_trees(args.pred, labeled=not args.unlabeled_input)
    if args.label_map or args.prefix_map:
        labels = set().union(*(t.nonterminals() for t in gold + pred))
        lmap = load_label_map(args.label_map) if args.label_map else prefix_label_map(labels)
        gold = [coarsen(t, lmap) for t in gold]
        pred = [coarsen(t, lmap) for t in pred]
    if not args.unlabeled_input:
        print(f"labeled\t{bracket_exact_match(gold, pred, True):.4f}")
    print(f"unlabeled\t{bracket_exact_match(gold, pred, False):.4f}")
    return 0


def cmd_gen_mini(args) -> int:
    from .minigen import MiniConfig, generate, write_corpus

    cfg = MiniConfig(train_size=args.train_size, dev_size=args.dev_size,
                     gen_per_depth=args.gen_per_depth, seed=args.seed)
    paths = write_corpus(generate(cfg), args.out_dir)
    for name, p in paths.items():
        print(f"{name}\t{p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amcogs", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert LFs to graphs, or check the round trip")
    p.add_argument("input")
    p.add_argument("--check", action="store_true", help="only report round-trip mismatches")
    p.add_argument("--format", choices=("tokenized", "compact"), default="tokenized")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("decompose", help="write AM dependency trees and a supertag lexicon")
    p.add_argument("input")
    p.add_argument("--trees", help="tree dump output (default stdout)")
    p.add_argument("--lexicon", help="supertag lexicon output")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("train", help="train the scorer")
    p.add_argument("train")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--dist", action=argparse.BooleanOptionalAction, default=True,
                   help="relative distance features on edges")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--loss", choices=("perceptron", "logistic"), default="perceptron")
    p.add_argument("--vocab-threshold", type=int, default=1)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="predict logical forms")
    p.add_argument("input")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--lexicon", help="override the lexicon stored in the model")
    p.add_argument("--k", type=int, default=DEFAULT_K, help="supertags per token")
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN,
                   help="drop supertags this far below the token's best (negative: keep all)")
    p.add_argument("--max-k", type=int, default=MAX_K)
    p.add_argument("--format", choices=("tokenized", "compact"), default="tokenized")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_parse)

    for name, func, help_ in (("eval", cmd_eval, "exact-match report"),
                              ("diff", cmd_diff, "term-level diffs of wrong predictions")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("gold")
        p.add_argument("pred")
        p.add_argument("--strict-match", action="store_true",
                       help="compare raw strings, whitespace included")
        if name == "eval":
            p.add_argument("--json")
            p.add_argument("--csv")
            p.add_argument("--depth-csv")
        else:
            p.add_argument("-n", type=int, default=20)
        p.set_defaults(func=func)

    p = sub.add_parser("syntax-eval", help="bracket exact match of constituency trees")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--unlabeled-input", action="store_true", help="files hold unlabeled trees")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--label-map", help="file of 'fine coarse' label pairs")
    g.add_argument("--prefix-map", action="store_true", help="coarsen labels to their prefix")
    p.set_defaults(func=cmd_syntax_eval)

    p = sub.add_parser("gen-mini", help="write the synthetic mini-corpus")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-size", type=int, default=1500)
    p.add_argument("--dev-size", type=int, default=200)
    p.add_argument("--gen-per-depth", type=int, default=50)
    p.set_defaults(func=cmd_gen_mini)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ce.FormatError, ce.LengthMismatch, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
