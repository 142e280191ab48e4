import pytest
from hypothesis import given, strategies as st

from nsr.values import (
    NOTHING,
    IntV,
    ListV,
    TokenV,
    ValueSyntaxError,
    format_value,
    parse_value,
    token_list,
)


def test_nothing_is_singleton():
    assert NOTHING is type(NOTHING)()
    assert repr(NOTHING) == "Nothing"


def test_int_value_rejects_negative_and_non_int():
    with pytest.raises(ValueError):
        IntV(-1)
    with pytest.raises(ValueError):
        IntV(1.5)
    assert IntV(10**40).n == 10**40


def test_token_value_rejects_reserved_and_delimiters():
    for bad in ["nothing", "a b", "x,y", "[", "12", ""]:
        with pytest.raises(ValueError):
            TokenV(bad)
    assert TokenV("I_JUMP").tok == "I_JUMP"


def test_format_basic():
    assert format_value(IntV(29)) == "29"
    assert format_value(NOTHING) == "nothing"
    assert format_value(TokenV("JUMP")) == "JUMP"
    assert format_value(token_list(["JUMP", "JUMP"])) == "[JUMP,JUMP]"
    assert format_value(ListV(())) == "[]"


def test_parse_basic():
    assert parse_value("29") == IntV(29)
    assert parse_value("nothing") is NOTHING
    assert parse_value("JUMP") == TokenV("JUMP")
    assert parse_value("[JUMP,WALK]") == token_list(["JUMP", "WALK"])
    assert parse_value("[]") == ListV(())
    assert parse_value("[[a],2]") == ListV((ListV((TokenV("a"),)), IntV(2)))


def test_parse_rejects_garbage():
    for bad in ["", "[a", "a]b", "[a,,b]"]:
        with pytest.raises(ValueSyntaxError):
            parse_value(bad)
    # a space inside an atom fails token validation rather than tokenization
    with pytest.raises(ValueError):
        parse_value("a b")


_tokens = st.sampled_from(["JUMP", "WALK", "LTURN", "a", "b", "c"])


def _values(depth=2):
    leaf = st.one_of(
        st.just(NOTHING),
        st.integers(min_value=0, max_value=10**6).map(IntV),
        _tokens.map(TokenV),
    )
    if depth == 0:
        return leaf
    return st.one_of(
        leaf,
        st.lists(_values(depth - 1), max_size=4).map(lambda xs: ListV(tuple(xs))),
    )


@given(_values())
def test_format_parse_round_trip(v):
    assert parse_value(format_value(v)) == v
