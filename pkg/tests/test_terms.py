import pytest
from hypothesis import given, strategies as st

from nsr.terms import (
    App,
    Comb,
    Lam,
    LitInt,
    LitList,
    LitTok,
    NOTHING_TERM,
    PRIM_ARITY,
    Prim,
    TermSyntaxError,
    Var,
    apply_spine,
    expand_combs,
    format_term,
    lambda_arity,
    parse_term,
    prims_used,
    program_size,
)
from nsr import programs


def test_prim_arity_table():
    assert PRIM_ARITY == {
        "0": 0,
        "nil": 0,
        "inc": 1,
        "dec": 1,
        "car": 1,
        "cdr": 1,
        "Y": 1,
        "==": 2,
        "cons": 2,
        "concat": 2,
        "if": 3,
    }


def test_program_size_counts_nodes():
    assert program_size(Prim("0")) == 1
    assert program_size(App(Prim("inc"), Prim("0"))) == 3
    # lam x. concat (concat x x) x  -- hand count: 10 nodes
    x = Var(0)
    double = App(App(Prim("concat"), x), x)
    thrice = Lam(App(App(Prim("concat"), double), x))
    assert program_size(thrice) == 10


def test_comb_counts_as_one_node():
    add = Comb("add", programs.add_program())
    assert program_size(add) == 1
    use = App(App(add, LitInt(1)), LitInt(2))
    assert program_size(use) == 5
    # expansion inlines the definition, restoring the true node count
    expanded = expand_combs(use)
    assert program_size(expanded) == 4 + program_size(programs.add_program())


def test_lambda_arity():
    assert lambda_arity(Lam(Lam(Var(0)))) == 2
    assert lambda_arity(Prim("cons")) == 2
    assert lambda_arity(Prim("0")) == 0
    assert lambda_arity(LitInt(7)) == 0
    assert lambda_arity(Comb("add", programs.add_program())) == 2


def test_format_examples():
    assert format_term(Prim("0")) == "0"
    assert format_term(App(Prim("inc"), Prim("0"))) == "(app inc 0)"
    assert format_term(Lam(Var(0))) == "(lam (var 0))"
    assert format_term(LitInt(5)) == "(int 5)"
    assert format_term(LitTok("JUMP")) == "(tok JUMP)"
    assert format_term(LitList(("a", "b"))) == "(list a b)"
    assert format_term(NOTHING_TERM) == "nothing"


def test_parse_round_trip_is_byte_identical():
    cases = [
        programs.add_program(),
        programs.sub_program(),
        programs.mul_program(),
        programs.div_program(),
        programs.reverse_program(),
        programs.identity(),
        programs.concat_pair(),
        programs.cons_token("JUMP"),
        programs.const_int(7),
        NOTHING_TERM,
    ]
    for t in cases:
        text = format_term(t)
        back = parse_term(text)
        assert format_term(back) == text
        # parsing never reconstructs library references, only their bodies
        assert back == expand_combs(t)


def test_parse_accepts_bare_digits():
    assert parse_term("(app inc 5)") == App(Prim("inc"), LitInt(5))


def test_parse_rejects_garbage():
    for bad in ["", "(lam", "(var x)", "(app inc)", "(frob 1)", "(lam (var 0)) x"]:
        with pytest.raises(TermSyntaxError):
            parse_term(bad)


def test_prims_used():
    assert prims_used(programs.add_program()) == {"Y", "if", "==", "0", "inc", "dec"}
    assert prims_used(Comb("add", programs.add_program())) == {
        "Y",
        "if",
        "==",
        "0",
        "inc",
        "dec",
    }


def test_apply_spine():
    t = apply_spine(Prim("cons"), LitTok("a"), Prim("nil"))
    assert t == App(App(Prim("cons"), LitTok("a")), Prim("nil"))


_prim_names = st.sampled_from(sorted(PRIM_ARITY))


def _terms(depth=3):
    leaf = st.one_of(
        st.integers(min_value=0, max_value=2).map(Var),
        _prim_names.map(Prim),
        st.integers(min_value=0, max_value=99).map(LitInt),
        st.sampled_from(["JUMP", "WALK", "b"]).map(LitTok),
        st.just(NOTHING_TERM),
    )
    if depth == 0:
        return leaf
    sub = _terms(depth - 1)
    return st.one_of(leaf, sub.map(Lam), st.tuples(sub, sub).map(lambda p: App(*p)))


@given(_terms())
def test_round_trip_random_terms(t):
    text = format_term(t)
    assert parse_term(text) == t
    assert format_term(parse_term(text)) == text
