"""Joint training by deduction and abduction.

Each example is first answered greedily: ground every token, parse the
symbol sequence, evaluate the tree bottom-up.  When the root value
misses the observation, a best-first search revises the proposal: pop
the most plausible (node, expected-value) obligation and try flipping
the node's symbol, rotating an incident arc, force-setting the node's
value as fresh semantic evidence, or passing an inverted expectation
down to a child.  Trees that survive the independent root check feed
the three module updates: grounding pairs for the perception net,
oracle transitions for the parser, and per-node evidence for program
induction.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .induction import SearchBudget, SemanticExample, fit_table
from .interpreter import (
    DEFAULT_LIMITS,
    EvalError,
    EvalLimits,
    adapt_args,
    evaluate,
    evaluate_tree,
)
from .parser import (
    ROOT,
    ParserState,
    TransitionClassifier,
    feature_ids,
    greedy_parse,
    is_projective,
    oracle_transitions,
    train_parser,
)
from .perception import classify_batch, train_perception
from .scoring import parser_arcs, tree_log_weight
from .terms import lambda_arity
from .tree import GssTree, new_tree, rotate
from .values import NOTHING, IntV, ListV, TokenV

SOLVE_MAX_VALUE = 120
SEMANTIC_CAP = 200


class Unsolvable(Exception):
    """No child value can make the parent reproduce its expectation."""


@dataclass
class AbductionBudget:
    """Limits on one example's revision search."""

    max_pops: int = 5_000
    max_queue: int = 100_000
    per_example_time: float | None = None

    def __post_init__(self):
        if self.max_pops <= 0 or self.max_queue <= 0:
            raise ValueError("budget fields must be positive")
        if self.per_example_time is not None and self.per_example_time <= 0:
            raise ValueError("budget fields must be positive")


@dataclass
class AbductionResult:
    tree: GssTree
    forced: tuple  # ((node, value), ...) force-set by the semantics revision
    pops: int


@dataclass
class TrainState:
    """Everything the machine learns, plus its evidence stores."""

    vocab_size: int
    parser: TransitionClassifier
    table: dict = field(default_factory=dict)
    stores: dict = field(default_factory=dict)
    perception: object = None
    names: object = None
    limits: EvalLimits = field(default=DEFAULT_LIMITS)
    search_budget: SearchBudget = field(default_factory=SearchBudget)


class ExampleStore:
    """Distinct (args, result) observations with accumulated weights."""

    def __init__(self):
        self.weights = {}

    def add(self, args, result, weight=1.0):
        key = (tuple(args), result)
        self.weights[key] = self.weights.get(key, 0.0) + weight

    def __len__(self):
        return len(self.weights)

    def as_examples(self):
        return [
            SemanticExample(args, result, weight)
            for (args, result), weight in sorted(
                self.weights.items(), key=lambda kv: repr(kv[0])
            )
        ]


def deduce(x, state: TrainState) -> GssTree:
    """Greedy proposal: ground, parse, evaluate.

    `x` is either a glyph feature matrix (grounded by the perception
    net) or a sequence of symbol ids (taken as read).  The returned
    tree carries `x` as its source and a value at every node; failures
    absorb to the Nothing value.
    """
    if isinstance(x, np.ndarray):
        if state.perception is None:
            raise ValueError("glyph input needs a perception model")
        symbols = tuple(
            int(i) for i in classify_batch(x, state.perception).argmax(axis=1)
        )
    else:
        symbols = tuple(int(s) for s in x)
        if any(not 0 <= s < state.vocab_size for s in symbols):
            raise ValueError("symbol id outside vocabulary")
    arcs = greedy_parse(symbols, state.parser)
    tree = new_tree(symbols, [a for a in arcs if a[0] != ROOT], source=x)
    return evaluate_tree(tree, state.table, state.limits, absorb_errors=True)


def _apply_node(sym, child_values, table, limits):
    """One node's value under the table, errors absorbed, like the
    bottom-up evaluator does it."""
    prog = table.get(sym)
    if prog is None:
        return NOTHING
    try:
        args = adapt_args(list(child_values), lambda_arity(prog))
        return evaluate(prog, args, limits)
    except EvalError:
        return NOTHING


def evaluate_with_forced(tree, table, forced, limits=DEFAULT_LIMITS):
    """Bottom-up evaluation where some nodes' values are pinned."""
    pinned = dict(forced)
    values = list(tree.values)
    for node in tree.postorder():
        if node in pinned:
            values[node] = pinned[node]
            continue
        values[node] = _apply_node(
            tree.symbols[node],
            [values[c] for c in tree.children(node)],
            table,
            limits,
        )
    return tree.with_values(values)


def _probe_match(program, cases, limits):
    for args, want in cases:
        try:
            if evaluate(program, list(args), limits) != want:
                return False
        except EvalError:
            return False
    return True


def _toks(*names):
    return ListV(tuple(TokenV(t) for t in names))


_INT_PROBES = {
    "add": [((IntV(3), IntV(4)), IntV(7)), ((IntV(0), IntV(6)), IntV(6)),
            ((IntV(9), IntV(8)), IntV(17))],
    "sub": [((IntV(9), IntV(4)), IntV(5)), ((IntV(6), IntV(6)), IntV(0)),
            ((IntV(7), IntV(0)), IntV(7))],
    "mul": [((IntV(3), IntV(4)), IntV(12)), ((IntV(5), IntV(0)), IntV(0)),
            ((IntV(7), IntV(8)), IntV(56))],
    "div": [((IntV(8), IntV(4)), IntV(2)), ((IntV(9), IntV(3)), IntV(3)),
            ((IntV(7), IntV(7)), IntV(1)), ((IntV(6), IntV(1)), IntV(6))],
}
_CONCAT_PROBES = [
    ((_toks("a"), _toks("b", "c")), _toks("a", "b", "c")),
    ((_toks(), _toks("x")), _toks("x")),
    ((_toks("p", "q"), _toks()), _toks("p", "q")),
]

_KIND_CACHE = {}


def recognize_binary(program, limits=DEFAULT_LIMITS):
    """Name the arithmetic or concatenation behaviour of a two-argument
    program, tested on probes; None when nothing matches."""
    key = program
    if key in _KIND_CACHE:
        return _KIND_CACHE[key]
    kind = None
    if lambda_arity(program) == 2:
        for name, cases in _INT_PROBES.items():
            if _probe_match(program, cases, limits):
                kind = name
                break
        if kind is None and _probe_match(program, _CONCAT_PROBES, limits):
            kind = "concat"
    _KIND_CACHE[key] = kind
    return kind


def _invert_known(kind, slot, other, target):
    if kind in ("add", "sub", "mul", "div"):
        if not (isinstance(other, IntV) and isinstance(target, IntV)):
            raise Unsolvable("integer inversion on non-integers")
        o, t = other.n, target.n
        if kind == "add":
            if t - o < 0:
                raise Unsolvable("sum below sibling")
            return IntV(t - o)
        if kind == "sub":
            if slot == 0:
                return IntV(t + o)
            if o - t < 0:
                raise Unsolvable("difference above minuend")
            return IntV(o - t)
        if kind == "mul":
            if o == 0:
                if t == 0:
                    return IntV(0)
                raise Unsolvable("zero sibling, nonzero product")
            if t % o:
                raise Unsolvable("product not divisible by sibling")
            return IntV(t // o)
        # exact division
        if slot == 0:
            if o == 0:
                raise Unsolvable("division by zero")
            return IntV(t * o)
        if t == 0 or o % t:
            raise Unsolvable("quotient does not divide evenly")
        return IntV(o // t)
    if kind == "concat":
        if not (isinstance(other, ListV) and isinstance(target, ListV)):
            raise Unsolvable("concat inversion on non-lists")
        n = len(other.items)
        if slot == 0:
            if n and (n > len(target.items) or target.items[-n:] != other.items):
                raise Unsolvable("sibling is not a suffix")
            return ListV(target.items[: len(target.items) - n])
        if n and (n > len(target.items) or target.items[:n] != other.items):
            raise Unsolvable("sibling is not a prefix")
        return ListV(target.items[n:])
    raise Unsolvable("unrecognized parent")


def solve(program, slot, child_values, target, limits=DEFAULT_LIMITS,
          max_value=SOLVE_MAX_VALUE):
    """Value for the child in `slot` that makes `program`, applied to
    the children, produce `target`.

    Recognized two-argument behaviours invert in closed form; anything
    else falls back to a bounded scan over small integers and over
    contiguous pieces of the target list.  Raises Unsolvable when no
    candidate works.
    """
    child_values = list(child_values)
    if not 0 <= slot < len(child_values):
        raise ValueError("slot %d outside %d children" % (slot, len(child_values)))
    if len(child_values) == 2:
        kind = recognize_binary(program, limits)
        if kind is not None:
            got = _invert_known(kind, slot, child_values[1 - slot], target)
            # the closed form trusts its probes; confirm on the real program
            if _matches(program, child_values, slot, got, target, limits):
                return got
            raise Unsolvable("closed-form candidate failed on the program")

    candidates = []
    if isinstance(target, ListV):
        items = target.items
        seen = set()
        for lo in range(len(items) + 1):
            for hi in range(lo, len(items) + 1):
                piece = items[lo:hi]
                if piece not in seen:
                    seen.add(piece)
                    candidates.append(ListV(piece))
    else:
        candidates.append(target)
    for v in child_values:
        if v is not NOTHING and v != target and v not in candidates:
            candidates.append(v)
    candidates.extend(IntV(k) for k in range(max_value + 1))

    tried = set()
    for v in candidates:
        if v in tried:
            continue
        tried.add(v)
        if _matches(program, child_values, slot, v, target, limits):
            return v
    raise Unsolvable("no candidate value up to the bound")


def _matches(program, child_values, slot, candidate, target, limits):
    trial = list(child_values)
    trial[slot] = candidate
    try:
        args = adapt_args(trial, lambda_arity(program))
        return evaluate(program, args, limits) == target
    except EvalError:
        return False


def abduce(tree: GssTree, y, state: TrainState,
           budget: AbductionBudget | None = None):
    """Best-first revision search from a failed proposal.

    Returns an AbductionResult whose tree provably evaluates to y
    (force-set nodes included), or None when the budget runs out.
    """
    budget = budget or AbductionBudget()
    glyphs = tree.source if isinstance(tree.source, np.ndarray) else None
    perception = state.perception if glyphs is not None else None

    def weigh(t):
        return tree_log_weight(t, state.parser, perception, glyphs)

    counter = 0
    heap = []
    visited = set()

    def push(priority, t, forced, node, target):
        # a tree with pinned values has no mass under the current table
        # (nothing in it computes those values), so every candidate that
        # actually executes to its target outranks every forced one
        nonlocal counter
        if len(heap) >= budget.max_queue:
            return
        key = (t.structure_key(), forced, node, target)
        if key in visited:
            return
        visited.add(key)
        counter += 1
        tier = 1 if forced else 0
        heapq.heappush(heap, (tier, -priority, counter, t, forced, node, target))

    # the first obligation covers the whole proposal at full confidence
    push(0.0, tree, (), tree.root, y)
    deadline = (
        time.monotonic() + budget.per_example_time
        if budget.per_example_time is not None
        else None
    )
    pops = 0
    while heap and pops < budget.max_pops:
        if deadline is not None and time.monotonic() > deadline:
            break
        _, negp, _, cur, forced, node, target = heapq.heappop(heap)
        pops += 1
        valued = evaluate_with_forced(cur, state.table, forced, state.limits)
        if valued.values[node] == target:
            if valued.root_value == y:
                return AbductionResult(valued, forced, pops)
            # obligation met but the root still misses: this branch's
            # expectation chain broke upstream, keep searching
            continue

        sym = cur.symbols[node]
        # flip the node's symbol; only when symbols were read off glyphs.
        # With symbol input the token is observed, so a flipped tree
        # contradicts the data and carries no posterior mass.
        if glyphs is not None:
            for alt in range(state.vocab_size):
                if alt == sym:
                    continue
                t2 = cur.with_symbol(node, alt)
                v2 = evaluate_with_forced(t2, state.table, forced, state.limits)
                if v2.values[node] == target:
                    push(weigh(t2), t2, forced, node, target)
        # rotate an arc incident to the node; the risen dependent takes
        # over the head's position in the tree, so the obligation may
        # transfer to either endpoint
        arcs = [(cur.parents[node], node)] if cur.parents[node] != -1 else []
        arcs.extend((node, c) for c in cur.children(node))
        for arc in arcs:
            t2 = rotate(cur, arc)
            if not is_projective(t2.n, parser_arcs(t2)):
                continue  # outside what the parser can ever derive
            v2 = evaluate_with_forced(t2, state.table, forced, state.limits)
            for cand in arc:
                if v2.values[cand] == target:
                    push(weigh(t2), t2, forced, cand, target)
        # force the value as new semantic evidence, within the cap;
        # weighed like any other candidate so structural fixes that
        # score higher get their turn first
        store = state.stores.get(sym)
        if (
            (store is None or len(store) < SEMANTIC_CAP)
            and node not in dict(forced)
        ):
            push(weigh(cur), cur, forced + ((node, target),), node, target)
        # hand an inverted expectation to each child
        prog = state.table.get(sym)
        if prog is not None:
            kids = cur.children(node)
            child_vals = [valued.values[c] for c in kids]
            for i, child in enumerate(kids):
                try:
                    want = solve(
                        prog, i, child_vals, target, state.limits
                    )
                except (Unsolvable, ValueError):
                    continue
                if want != valued.values[child]:
                    push(-negp, cur, forced, child, want)
    return None


@dataclass
class TrainingBuffer:
    """Supervision harvested from verified trees only."""

    null_id: int
    perception_pairs: list = field(default_factory=list)
    parser_pairs: list = field(default_factory=list)
    semantic: list = field(default_factory=list)
    trees: list = field(default_factory=list)

    def add_tree(self, tree: GssTree):
        self.trees.append(tree)
        if isinstance(tree.source, np.ndarray):
            for i, sym in enumerate(tree.symbols):
                self.perception_pairs.append((tree.source[i], sym))
        symbols = tree.symbols
        state = ParserState.initial(len(symbols))
        for t in oracle_transitions(symbols, parser_arcs(tree)):
            self.parser_pairs.append((feature_ids(state, symbols, self.null_id), t))
            state = state.apply(t)
        for node in range(tree.n):
            args = tuple(tree.values[c] for c in tree.children(node))
            self.semantic.append((symbols[node], args, tree.values[node]))


def predict(x, state: TrainState):
    """Run the full pipeline and return the root value."""
    return deduce(x, state).root_value


def exact_match_rate(dataset, state: TrainState):
    if not dataset:
        return 0.0
    hits = sum(predict(x, state) == y for x, y in dataset)
    return hits / len(dataset)


METRICS_HEADER = (
    "epoch, abduction_success_rate, perception_acc, "
    "parser_transition_acc, semantics_hit_rate, train_acc, val_acc"
)


def train(dataset, state: TrainState, epochs, budget=None, val_dataset=None,
          metrics_out=None, seed=0):
    """The outer loop: propose, revise, then update every module.

    Examples whose revision search exhausts its budget are skipped for
    the epoch and counted against the success rate.  Returns the state
    (modified in place) after writing one metrics record per epoch.
    """
    budget = budget or AbductionBudget()
    if metrics_out is not None and epochs > 0:
        print(METRICS_HEADER, file=metrics_out)
    for epoch in range(epochs):
        buffer = TrainingBuffer(state.parser.null_id)
        successes = 0
        for x, y in dataset:
            proposal = deduce(x, state)
            if proposal.root_value == y:
                accepted = proposal
            else:
                res = abduce(proposal, y, state, budget)
                if res is None:
                    continue
                accepted = res.tree
            successes += 1
            buffer.add_tree(accepted)

        # Every node of every accepted tree is semantic evidence; the
        # force-set nodes arrive this way too, since their values are
        # pinned in the accepted tree.  A node whose children include
        # an unvalued symbol is not an input-output example yet, so it
        # is held back.  The fit sees this epoch's evidence only; the
        # cumulative stores just feed the revision cap.
        epoch_stores = {}
        for sym, args, result in buffer.semantic:
            if result is NOTHING or any(a is NOTHING for a in args):
                continue
            epoch_stores.setdefault(sym, ExampleStore()).add(args, result)
            state.stores.setdefault(sym, ExampleStore()).add(args, result)

        if state.perception is not None and buffer.perception_pairs:
            train_perception(
                buffer.perception_pairs, state.perception, seed=seed + epoch
            )
        parser_pairs = buffer.parser_pairs
        if parser_pairs:
            train_parser(parser_pairs, state.parser, seed=seed + epoch)
        stores = {
            sym: store.as_examples() for sym, store in epoch_stores.items()
        }
        if stores:
            names = None
            if state.names is not None:
                names = {
                    sym: state.names.name_of(sym) for sym in stores
                }
            # during training the best program stands even when the
            # evidence is still noisy; a wrong winner is displaced as
            # soon as cleaner evidence outweighs the junk
            state.table, _ = fit_table(
                stores,
                budget=replace(state.search_budget, tolerance=1.0),
                names=names,
                incumbents=state.table,
            )

        if metrics_out is not None:
            n = max(len(dataset), 1)
            train_acc = exact_match_rate(dataset, state)
            val_acc = (
                exact_match_rate(val_dataset, state)
                if val_dataset
                else train_acc
            )
            record = "%d, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f" % (
                epoch,
                successes / n,
                _perception_accuracy(buffer, state),
                _parser_accuracy(parser_pairs, state),
                _semantics_hit_rate(epoch_stores, state),
                train_acc,
                val_acc,
            )
            print(record, file=metrics_out)
    return state


def _perception_accuracy(buffer, state):
    if state.perception is None or not buffer.perception_pairs:
        return 1.0
    glyphs = np.stack([g for g, _ in buffer.perception_pairs])
    labels = np.array([s for _, s in buffer.perception_pairs])
    got = classify_batch(glyphs, state.perception).argmax(axis=1)
    return float((got == labels).mean())


def _parser_accuracy(parser_pairs, state):
    if not parser_pairs:
        return 1.0
    ids = np.stack([p[0] for p in parser_pairs])
    labels = np.array([p[1] for p in parser_pairs])
    got = state.parser.logits(ids).argmax(axis=1)
    return float((got == labels).mean())


def _semantics_hit_rate(epoch_stores, state):
    total = hits = 0.0
    for sym, store in epoch_stores.items():
        prog = state.table.get(sym)
        for ex in store.as_examples():
            total += ex.weight
            if prog is None:
                continue
            if _apply_node(sym, ex.args, state.table, state.limits) == ex.result:
                hits += ex.weight
    return hits / total if total else 1.0
