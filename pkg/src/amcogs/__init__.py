"""Logical-form/graph conversion, AM algebra, and an exact projective AM parser for COGS."""

from .algebra import AmDepTree, Op, Supertag, TreeEdge, apply, evaluate, modify
from .convert import graph_to_lf, lf_to_graph, primitive_graph_to_lf, primitive_to_graph
from .corpus import EvalReport, diff_report, evaluate as evaluate_corpus, exact_match, load_corpus
from .decoder import NoParse, decode, parse_to_lf
from .decompose import SupertagLexicon, decompose, decompose_primitive
from .graph import AmType, AsGraph, SemGraph, isomorphic
from .lf import LogicalForm, canonical_order, parse_lf, print_lf
from .pipeline import predict, train_model
from .scorer import Scorer, ScorerConfig, dist_encode, train
from .syntax import ConstTree, bracket_exact_match, coarsen, linearize, parse_tree

__version__ = "0.1.0"
