import pytest
from hypothesis import given, settings, strategies as st

from nsr.tree import (
    ArcNotFound,
    CycleError,
    DisconnectedError,
    GssTree,
    MultiParentError,
    TreeStructureError,
    Vocabulary,
    enumerate_parent_vectors,
    format_tree,
    new_tree,
    parse_tree,
    rotate,
)
from nsr.values import NOTHING, IntV


def test_vocabulary_round_trip():
    v = Vocabulary(["2", "+", "3"])
    assert v.id_of("+") == 1
    assert v.name_of(2) == "3"
    assert v.decode(v.encode(["3", "+", "2"])) == ["3", "+", "2"]


def test_singleton_tree():
    t = new_tree([7], [])
    assert t.n == 1
    assert t.root == 0
    assert t.root_value is NOTHING
    assert t.arcs() == ()


def test_new_tree_from_arcs():
    # "2 + 3" headed by +
    t = new_tree([0, 1, 2], [(1, 0), (1, 2)])
    assert t.parents == (1, -1, 1)
    assert t.children(1) == (0, 2)
    assert t.root == 1


def test_new_tree_rejects_multi_parent():
    with pytest.raises(MultiParentError):
        new_tree([0, 1, 2], [(0, 2), (1, 2)])


def test_new_tree_rejects_cycles():
    with pytest.raises(CycleError):
        new_tree([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(CycleError):
        # 2-cycle beside a root: 1 and 2 head each other, unreachable from 0
        GssTree([0, 1, 2], (-1, 2, 1))


def test_new_tree_rejects_forests():
    with pytest.raises(DisconnectedError):
        new_tree([0, 1, 2], [(0, 1)])


def test_self_loop_rejected():
    with pytest.raises(TreeStructureError):
        new_tree([0, 1], [(1, 1)])


def test_postorder_visits_children_first():
    t = GssTree((0, 1, 2, 3, 4), (1, -1, 3, 1, 3))
    order = t.postorder()
    assert order[-1] == t.root
    pos = {node: k for k, node in enumerate(order)}
    for head, dep in t.arcs():
        assert pos[dep] < pos[head]
    assert sorted(order) == [0, 1, 2, 3, 4]


def test_ancestors():
    t = GssTree((0, 1, 2), (-1, 0, 1))
    assert t.ancestors(2) == [1, 0]
    assert t.ancestors(0) == []


def test_with_symbol_resets_value_path():
    t = GssTree((0, 1, 2), (-1, 0, 1), values=(IntV(5), IntV(4), IntV(3)))
    u = t.with_symbol(2, 9)
    assert u.symbols == (0, 1, 9)
    assert u.values == (NOTHING, NOTHING, NOTHING)
    # an untouched sibling branch keeps its value
    t2 = GssTree((0, 1, 2), (-1, 0, 0), values=(IntV(5), IntV(4), IntV(3)))
    u2 = t2.with_symbol(1, 9)
    assert u2.values == (NOTHING, NOTHING, IntV(3))


def test_rotate_chain_cases():
    # frozen by hand: chain 0 <- 1 <- 2 (parents [-1, 0, 1])
    t = GssTree((0, 1, 2), (-1, 0, 1))
    assert rotate(t, (1, 2)).parents == (-1, 2, 0)
    assert rotate(t, (0, 1)).parents == (1, -1, 1)


def test_rotate_requires_existing_arc():
    t = GssTree((0, 1, 2), (-1, 0, 1))
    with pytest.raises(ArcNotFound):
        rotate(t, (0, 2))
    with pytest.raises(ArcNotFound):
        rotate(t, (-1, 0))


def test_rotate_resets_affected_values():
    t = GssTree((0, 1, 2), (-1, 0, 1), values=(IntV(1), IntV(2), IntV(3)))
    u = rotate(t, (1, 2))
    assert u.values == (NOTHING, NOTHING, NOTHING)


def test_rotate_is_an_involution_everywhere():
    for parents in enumerate_parent_vectors(3):
        t = GssTree((0, 1, 2), parents)
        for head, dep in t.arcs():
            back = rotate(rotate(t, (head, dep)), (dep, head))
            assert back.parents == t.parents


def test_parent_vector_enumeration_counts():
    # rooted labeled trees on n nodes: n^(n-1)
    assert len(list(enumerate_parent_vectors(1))) == 1
    assert len(list(enumerate_parent_vectors(2))) == 2
    assert len(list(enumerate_parent_vectors(3))) == 9
    assert len(list(enumerate_parent_vectors(4))) == 64


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_rotation_preserves_treeness(data):
    vecs = list(enumerate_parent_vectors(4))
    t = GssTree((0, 1, 2, 3), data.draw(st.sampled_from(vecs)))
    for _ in range(5):
        arcs = t.arcs()
        if not arcs:
            break
        # the constructor inside rotate re-validates single-rootedness
        t = rotate(t, data.draw(st.sampled_from(arcs)))
        assert t.n == 4 and t.parents.count(-1) == 1


def test_format_parse_round_trip():
    vocab = Vocabulary(["2", "+", "3"])
    t = GssTree((0, 1, 2), (1, -1, 1), values=(IntV(2), IntV(5), IntV(3)))
    text = format_tree(t, vocab)
    assert text.splitlines()[1] == "1\t+\t-1\t5"
    assert parse_tree(text, vocab) == t
    bare = format_tree(t)
    assert parse_tree(bare) == t


def test_parse_tree_rejects_out_of_order_lines():
    with pytest.raises(TreeStructureError):
        parse_tree("1\t0\t-1\tnothing")


def test_equality_and_hash():
    a = GssTree((0, 1), (1, -1))
    b = GssTree((0, 1), (1, -1))
    c = GssTree((0, 1), (-1, 0))
    assert a == b and hash(a) == hash(b)
    assert a != c
