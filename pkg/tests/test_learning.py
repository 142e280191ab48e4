"""Deduction-abduction training loop."""

import heapq
import io

import numpy as np
import pytest

from nsr.interpreter import evaluate_tree
from nsr.learning import (
    SEMANTIC_CAP,
    AbductionBudget,
    ExampleStore,
    TrainState,
    TrainingBuffer,
    METRICS_HEADER,
    Unsolvable,
    abduce,
    deduce,
    evaluate_with_forced,
    exact_match_rate,
    predict,
    recognize_binary,
    solve,
    train,
)
from nsr.parser import ParserState, TransitionClassifier, is_projective
from nsr.perception import GlyphChannel, PerceptionModel
from nsr.programs import (
    INC,
    add_program,
    concat_pair,
    const_int,
    div_program,
    double_list,
    identity,
    mul_program,
    sub_program,
)
from nsr.scoring import parser_arcs
from nsr.terms import App, Lam, Var
from nsr.tree import new_tree
from nsr.values import NOTHING, IntV, ListV, TokenV


def toks(*names):
    return ListV(tuple(TokenV(t) for t in names))


def digit_add_table():
    table = {d: const_int(d) for d in range(10)}
    table[10] = add_program()
    return table


def capped_store():
    store = ExampleStore()
    for k in range(SEMANTIC_CAP):
        store.add((IntV(k),), IntV(k))
    return store


# ---------------------------------------------------------------- solve

def test_solve_add_right_operand():
    # 2 + 27 = 29, so the missing right child of + must be 2
    got = solve(add_program(), 1, [IntV(27), NOTHING], IntV(29))
    assert got == IntV(2)


def test_solve_add_left_operand():
    got = solve(add_program(), 0, [NOTHING, IntV(27)], IntV(29))
    assert got == IntV(2)


def test_solve_add_infeasible():
    with pytest.raises(Unsolvable):
        solve(add_program(), 0, [NOTHING, IntV(9)], IntV(4))


def test_solve_sub_both_slots():
    assert solve(sub_program(), 0, [NOTHING, IntV(4)], IntV(5)) == IntV(9)
    assert solve(sub_program(), 1, [IntV(9), NOTHING], IntV(5)) == IntV(4)
    with pytest.raises(Unsolvable):
        solve(sub_program(), 1, [IntV(9), NOTHING], IntV(12))


def test_solve_mul_zero_sibling_is_unsolvable():
    with pytest.raises(Unsolvable):
        solve(mul_program(), 0, [NOTHING, IntV(0)], IntV(7))


def test_solve_mul_divisibility():
    assert solve(mul_program(), 0, [NOTHING, IntV(4)], IntV(12)) == IntV(3)
    with pytest.raises(Unsolvable):
        solve(mul_program(), 0, [NOTHING, IntV(5)], IntV(12))


def test_solve_div_both_slots():
    assert solve(div_program(), 0, [NOTHING, IntV(4)], IntV(2)) == IntV(8)
    assert solve(div_program(), 1, [IntV(9), NOTHING], IntV(3)) == IntV(3)
    with pytest.raises(Unsolvable):
        solve(div_program(), 1, [IntV(9), NOTHING], IntV(0))


def test_solve_concat_strips_prefix_and_suffix():
    want = toks("a", "b", "c")
    assert solve(concat_pair(), 1, [toks("a"), NOTHING], want) == toks("b", "c")
    assert solve(concat_pair(), 0, [NOTHING, toks("c")], want) == toks("a", "b")
    with pytest.raises(Unsolvable):
        solve(concat_pair(), 1, [toks("x"), NOTHING], want)


def test_solve_unary_falls_back_to_scan():
    # parent is inc: the child must be 6 for the node to produce 7
    got = solve(Lam(App(INC, Var(0))), 0, [NOTHING], IntV(7))
    assert got == IntV(6)


def test_solve_list_scan_without_closed_form():
    # x ++ x = [a, a] forces x = [a]
    got = solve(double_list(), 0, [NOTHING], toks("a", "a"))
    assert got == toks("a")


def test_recognize_binary_names_the_four_operators():
    assert recognize_binary(add_program()) == "add"
    assert recognize_binary(sub_program()) == "sub"
    assert recognize_binary(mul_program()) == "mul"
    assert recognize_binary(div_program()) == "div"
    assert recognize_binary(concat_pair()) == "concat"
    assert recognize_binary(identity()) is None
    assert recognize_binary(const_int(3)) is None


# ------------------------------------------------- forced evaluation

def test_evaluate_with_forced_pins_propagate():
    tree = new_tree((0, 10, 3), [(1, 0), (1, 2)])
    table = digit_add_table()
    plain = evaluate_with_forced(tree, table, ())
    assert plain.root_value == IntV(3)
    pinned = evaluate_with_forced(tree, table, ((0, IntV(7)),))
    assert pinned.values[0] == IntV(7)
    assert pinned.root_value == IntV(10)


# ---------------------------------------------------------------- abduce

def flat_tree(symbols, table):
    n = len(symbols)
    root = n // 2
    arcs = [(root, i) for i in range(n) if i != root]
    tree = new_tree(symbols, arcs)
    return evaluate_tree(tree, table, absorb_errors=True)


def chain_tree(symbols, table):
    arcs = [(i, i + 1) for i in range(len(symbols) - 1)]
    tree = new_tree(symbols, arcs)
    return evaluate_tree(tree, table, absorb_errors=True)


def symbol_state(table=None, vocab=11):
    return TrainState(
        vocab_size=vocab,
        parser=TransitionClassifier(vocab, seed=0),
        table=dict(table or {}),
    )


def test_abduce_returns_correct_tree_at_first_pop():
    state = symbol_state(digit_add_table())
    tree = flat_tree((2, 10, 3), state.table)
    res = abduce(tree, IntV(5), state)
    assert res is not None
    assert res.pops == 1
    assert res.forced == ()
    assert res.tree.structure_key() == tree.structure_key()


def test_abduce_repairs_chain_by_rotation_without_forcing():
    state = symbol_state(digit_add_table())
    tree = chain_tree((2, 10, 3), state.table)
    assert tree.root_value == IntV(2)
    res = abduce(tree, IntV(5), state)
    assert res is not None
    assert res.forced == ()
    assert res.tree.parents == (1, -1, 1)
    assert res.tree.root_value == IntV(5)


def test_abduce_soundness_is_independently_checkable():
    state = symbol_state(digit_add_table())
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        symbols = tuple(int(s) for s in rng.integers(0, 11, n))
        y = IntV(int(rng.integers(0, 12)))
        proposal = deduce(symbols, state)
        res = abduce(proposal, y, state, AbductionBudget(max_pops=300))
        if res is None:
            continue
        assert res.tree.root_value == y
        redone = evaluate_with_forced(res.tree, state.table, res.forced)
        assert redone.root_value == y


def test_abduce_flips_misperceived_operator_on_glyph_input():
    # glyphs show 2 + 3 but perception proposed 2 x 3; with y = 5 the
    # revision search restores the + symbol
    table = digit_add_table()
    table[11] = mul_program()
    channel = GlyphChannel(12, sigma=0.0, seed=5)
    glyphs = np.stack([channel.render(s, 7) for s in (2, 10, 3)])
    tree = new_tree((2, 11, 3), [(1, 0), (1, 2)], source=glyphs)
    tree = evaluate_tree(tree, table, absorb_errors=True)
    assert tree.root_value == IntV(6)
    state = TrainState(
        vocab_size=12,
        parser=TransitionClassifier(12, seed=0),
        table=table,
        perception=PerceptionModel(12),
    )
    res = abduce(tree, IntV(5), state)
    assert res is not None
    assert res.forced == ()
    assert res.tree.symbols == (2, 10, 3)
    assert res.tree.root_value == IntV(5)


def test_abduce_never_flips_observed_symbols():
    # the same repair is impossible with symbol input: the tokens are
    # data, so with forcing capped out the search must come up empty
    table = digit_add_table()
    table[11] = mul_program()
    state = symbol_state(table, vocab=12)
    state.stores = {s: capped_store() for s in (2, 11, 3)}
    tree = flat_tree((2, 11, 3), table)
    assert abduce(tree, IntV(5), state) is None


def test_abduce_prefers_computed_repair_over_forcing():
    state = symbol_state(digit_add_table())
    tree = chain_tree((2, 10, 3), state.table)
    res = abduce(tree, IntV(5), state)
    # an empty store invites forcing at the root, yet the rotation that
    # actually computes 5 must win
    assert res.forced == ()


def test_abduce_forces_root_when_nothing_computes():
    state = symbol_state({d: const_int(d) for d in range(10)})
    tree = chain_tree((2, 10, 3), state.table)
    res = abduce(tree, IntV(5), state)
    assert res is not None
    assert len(res.forced) == 1
    node, value = res.forced[0]
    assert value == IntV(5)
    assert res.tree.root_value == IntV(5)


def test_abduce_exhausts_and_returns_none():
    state = symbol_state({0: const_int(0)})
    state.stores = {0: capped_store()}
    tree = evaluate_tree(new_tree((0,), []), state.table, absorb_errors=True)
    assert abduce(tree, IntV(9), state) is None


def test_queue_convention_pops_tiers_then_weights():
    entries = [
        (1, -9.9, 0, "forced-high"),
        (0, 3.5, 1, "weak-repair"),
        (0, 1.0, 2, "strong-repair"),
        (1, -0.5, 3, "forced-low"),
    ]
    heap = list(entries)
    heapq.heapify(heap)
    order = [heapq.heappop(heap)[3] for _ in range(len(heap))]
    assert order == ["strong-repair", "weak-repair", "forced-high", "forced-low"]


# ---------------------------------------------------------------- deduce

def test_deduce_symbol_input_builds_valid_valued_trees():
    state = symbol_state()
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        symbols = tuple(int(s) for s in rng.integers(0, 11, n))
        tree = deduce(symbols, state)
        assert tree.n == n
        assert tree.symbols == symbols
        assert is_projective(n, parser_arcs(tree))
        assert len(tree.values) == n
        assert all(v is NOTHING for v in tree.values)  # empty table
        assert tree.source == symbols


def test_deduce_rejects_bad_input():
    state = symbol_state()
    with pytest.raises(ValueError):
        deduce((0, 99), state)
    with pytest.raises(ValueError):
        deduce(np.zeros((2, 16)), state)


def test_deduce_glyph_input_grounds_with_perception():
    channel = GlyphChannel(5, sigma=0.0, seed=2)
    model = PerceptionModel(5, seed=3)
    glyphs = np.stack([channel.render(s, 1) for s in (4, 0, 2)])
    state = TrainState(
        vocab_size=5,
        parser=TransitionClassifier(5, seed=0),
        perception=model,
    )
    tree = deduce(glyphs, state)
    want = model.logits(glyphs).argmax(axis=1)
    assert tree.symbols == tuple(int(i) for i in want)


# ---------------------------------------------------------------- buffer

def test_buffer_harvests_parser_and_semantic_supervision():
    table = digit_add_table()
    tree = flat_tree((2, 10, 3), table)
    buf = TrainingBuffer(null_id=11)
    buf.add_tree(tree)
    # transition pairs replay to the very same arcs
    state = ParserState.initial(3)
    for _, t in buf.parser_pairs:
        state = state.apply(t)
    assert state.is_terminal
    assert state.arcs == parser_arcs(tree)
    rows = sorted(buf.semantic, key=repr)
    assert (10, (IntV(2), IntV(3)), IntV(5)) in rows
    assert (2, (), IntV(2)) in rows
    assert (3, (), IntV(3)) in rows
    assert buf.perception_pairs == []


def test_buffer_collects_glyph_pairs_for_glyph_trees():
    table = digit_add_table()
    channel = GlyphChannel(11, sigma=0.0, seed=0)
    glyphs = np.stack([channel.render(s, 3) for s in (2, 10, 3)])
    tree = new_tree((2, 10, 3), [(1, 0), (1, 2)], source=glyphs)
    tree = evaluate_tree(tree, table, absorb_errors=True)
    buf = TrainingBuffer(null_id=11)
    buf.add_tree(tree)
    assert len(buf.perception_pairs) == 3
    assert [s for _, s in buf.perception_pairs] == [2, 10, 3]


# ---------------------------------------------------------------- train

def tiny_dataset(hi=4):
    data = [((d,), IntV(d)) for d in range(10)]
    data += [((a, 10, b), IntV(a + b)) for a in range(hi) for b in range(hi)]
    return data


def test_train_zero_epochs_changes_nothing():
    state = symbol_state()
    out = io.StringIO()
    train(tiny_dataset(), state, epochs=0, metrics_out=out)
    assert out.getvalue() == ""
    assert state.table == {}
    assert state.stores == {}


def test_train_metrics_format_and_monotone_success():
    state = symbol_state()
    out = io.StringIO()
    train(tiny_dataset(), state, epochs=10, metrics_out=out, seed=0)
    lines = out.getvalue().strip().splitlines()
    assert lines[0] == METRICS_HEADER
    assert len(lines) == 11
    rates = []
    for epoch, line in enumerate(lines[1:]):
        fields = [f.strip() for f in line.split(",")]
        assert len(fields) == 7
        assert int(fields[0]) == epoch
        rates.append(float(fields[1]))
        for f in fields[1:]:
            assert 0.0 <= float(f) <= 1.0
    assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_train_learns_digits_from_single_tokens():
    state = symbol_state()
    data = [((d,), IntV(d)) for d in range(10)]
    train(data, state, epochs=1)
    for d in range(10):
        assert predict((d,), state) == IntV(d)
    assert exact_match_rate(data, state) == 1.0


def test_train_grows_structure_and_generalizes():
    state = symbol_state()
    data = [((d,), IntV(d)) for d in range(10)]
    data += [((a, 10, b), IntV(a + b)) for a in range(6) for b in range(6)]
    train(data, state, epochs=100, seed=0)
    assert exact_match_rate(data, state) == 1.0
    # operand pair never seen in training
    assert predict((9, 10, 9), state) == IntV(18)
