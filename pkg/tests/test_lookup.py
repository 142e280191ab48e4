"""Four-primitive memorization machine."""

import random

import pytest

from nsr.lookup import DuplicateInputConflict, LookupNSR, build_lookup_nsr
from nsr.terms import App, Comb, Lam, Prim, format_term
from nsr.values import IntV, ListV, NOTHING, TokenV


def prim_names(term):
    seen = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Prim):
            seen.add(t.name)
        elif isinstance(t, App):
            stack.extend((t.fun, t.arg))
        elif isinstance(t, Lam):
            stack.append(t.body)
        elif isinstance(t, Comb):
            stack.append(t.term)
    return seen


def random_dataset(rng, n):
    pairs = []
    seen = set()
    while len(pairs) < n:
        x = tuple(rng.randrange(8) for _ in range(rng.randrange(1, 6)))
        if x in seen:
            continue
        seen.add(x)
        if rng.random() < 0.5:
            y = IntV(rng.randrange(100))
        else:
            y = ListV(tuple(TokenV("t%d" % rng.randrange(5)) for _ in range(3)))
        pairs.append((x, y))
    return pairs


def test_replays_every_pair():
    rng = random.Random(0)
    for _ in range(3):
        pairs = random_dataset(rng, 20)
        m = build_lookup_nsr(pairs)
        for x, y in pairs:
            assert m.run(x) == y


def test_unseen_input_falls_through_to_absent():
    m = build_lookup_nsr([((1, 2), IntV(7))])
    assert m.run((9, 9)) is NOTHING


def test_empty_dataset_answers_absent_everywhere():
    m = build_lookup_nsr([])
    assert m.run(()) is NOTHING
    assert m.run((0, 1, 2)) is NOTHING


def test_conflicting_duplicate_raises():
    with pytest.raises(DuplicateInputConflict):
        build_lookup_nsr([((1,), IntV(2)), ((1,), IntV(3))])


def test_identical_duplicate_collapses():
    m = build_lookup_nsr([((1,), IntV(2)), ((1,), IntV(2)), ((4,), IntV(5))])
    assert len(m.index_map) == 2
    assert m.run((1,)) == IntV(2)
    assert m.run((4,)) == IntV(5)


def test_table_uses_only_the_four_primitives():
    pairs = [((0, 1), IntV(3)), ((2,), ListV((TokenV("a"),)))]
    m = build_lookup_nsr(pairs)
    allowed = {"0", "inc", "==", "if"}
    for program in m.table.values():
        assert prim_names(program) <= allowed


def test_index_programs_are_pure_counting_chains():
    m = build_lookup_nsr([((i,), IntV(i * i)) for i in range(5)])
    for i in range(m.fallback_index + 1):
        assert prim_names(m.table[i]) <= {"0", "inc"}


def test_parse_builds_the_two_node_structure():
    m = build_lookup_nsr([((3, 3), IntV(9))])
    tree = m.parse((3, 3))
    assert tree.symbols == (0, m.lookup_symbol)
    assert tree.parents == (1, -1)
    tree = m.parse((5,))
    assert tree.symbols == (m.fallback_index, m.lookup_symbol)


def test_construction_is_deterministic():
    pairs = [((i, i + 1), IntV(i)) for i in range(10)]
    a = build_lookup_nsr(pairs)
    b = build_lookup_nsr(pairs)
    assert format_term(a.program) == format_term(b.program)
    assert a.index_map == b.index_map


def test_fifty_pairs_within_limits():
    rng = random.Random(7)
    pairs = random_dataset(rng, 50)
    m = build_lookup_nsr(pairs)
    hits = sum(m.run(x) == y for x, y in pairs)
    assert hits == 50
