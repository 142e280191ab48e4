"""Posterior weights over candidate structures.

A candidate tree is scored by how plausibly the current modules would
have produced it: the grounding probability of its symbols (when the
input came through the glyph channel) times the probability the
transition classifier walks its canonical derivation.  Program
execution is deterministic, so semantics contributes membership in the
congruent set rather than a factor: trees whose root value misses the
observation carry zero posterior mass.
"""

from __future__ import annotations

import numpy as np

from .interpreter import DEFAULT_LIMITS, evaluate_tree
from .nnet import softmax
from .parser import (
    ROOT,
    NonProjectiveError,
    feature_ids,
    legal_transitions,
    oracle_transitions,
)
from .perception import classify_batch
from .tree import GssTree


def parser_arcs(tree: GssTree):
    """The tree's arc set in parser convention, root arc included."""
    arcs = {(h, d) for h, d in tree.arcs()}
    arcs.add((ROOT, tree.root))
    return arcs


def parse_log_prob(symbols, arcs, clf):
    """Log-probability of the canonical derivation of `arcs`.

    Each step renormalizes the classifier scores over the legal
    transitions, so summing the resulting probability over every
    complete derivation of n tokens gives exactly one.
    """
    from .parser import ParserState

    seq = oracle_transitions(symbols, arcs)
    state = ParserState.initial(len(symbols))
    total = 0.0
    for t in seq:
        legal = legal_transitions(state)
        ids = feature_ids(state, symbols, clf.null_id)
        scores = clf.logits(ids[None, :])[0]
        masked = np.array([scores[u] for u in legal])
        probs = softmax(masked[None, :])[0]
        total += float(np.log(max(probs[legal.index(t)], 1e-300)))
        state = state.apply(t)
    return total


def grounding_log_prob(glyphs, symbols, model):
    probs = classify_batch(np.asarray(glyphs), model)
    idx = np.arange(len(symbols))
    return float(np.log(np.maximum(probs[idx, list(symbols)], 1e-300)).sum())


def tree_log_weight(tree: GssTree, clf, perception=None, glyphs=None):
    """Unnormalized log-posterior of one candidate structure.

    Structures the arc-standard system cannot derive (arc rotation can
    produce them) get -inf: the parser assigns them no probability.
    """
    try:
        total = parse_log_prob(list(tree.symbols), parser_arcs(tree), clf)
    except NonProjectiveError:
        return float("-inf")
    if perception is not None and glyphs is not None:
        total += grounding_log_prob(glyphs, tree.symbols, perception)
    return total


def congruent(tree: GssTree, y, table, limits=DEFAULT_LIMITS):
    """Does the candidate execute to the observed result?"""
    valued = evaluate_tree(tree, table, limits, absorb_errors=True)
    return valued.root_value == y


def posterior_over_candidates(
    trees, y, clf, table, limits=DEFAULT_LIMITS, perception=None, glyphs=None
):
    """Normalized posterior over the candidate list.

    Mass lands only on candidates whose execution reproduces y; it is
    zero everywhere when no candidate does.
    """
    logs = np.full(len(trees), -np.inf)
    for i, tree in enumerate(trees):
        if congruent(tree, y, table, limits):
            logs[i] = tree_log_weight(tree, clf, perception, glyphs)
    if not np.isfinite(logs).any():
        return np.zeros(len(trees))
    peak = logs[np.isfinite(logs)].max()
    weights = np.where(np.isfinite(logs), np.exp(logs - peak), 0.0)
    return weights / weights.sum()
