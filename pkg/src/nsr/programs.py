"""Hand-written reference programs.

Canonical fixpoint-style arithmetic and list programs in the term
language.  These are fixtures: evaluation checks, inverse-solving probes,
and hand-installed tables use them.  Induction searches for its own
programs and never consults this module.
"""

from __future__ import annotations

from .terms import App, Comb, Lam, LitInt, LitList, LitTok, Prim, Var, apply_spine

V0, V1, V2 = Var(0), Var(1), Var(2)
ZERO = Prim("0")
NIL = Prim("nil")
INC = Prim("inc")
DEC = Prim("dec")
EQ = Prim("==")
IF = Prim("if")
CONS = Prim("cons")
CAR = Prim("car")
CDR = Prim("cdr")
CONCAT = Prim("concat")
Y = Prim("Y")


def if_(c, t, e):
    return apply_spine(IF, c, t, e)


def eq(a, b):
    return apply_spine(EQ, a, b)


def identity():
    """One argument, returned unchanged."""
    return Lam(V0)


def inc_chain(k: int):
    """The numeral k spelled as inc applied k times to 0."""
    t = ZERO
    for _ in range(k):
        t = App(INC, t)
    return t


def const_int(k: int):
    return LitInt(k)


def const_tokens(tokens):
    return LitList(tuple(tokens))


def add_program():
    """x + y by counting down the first argument.

    Y (lam rec. lam x. lam y. if x == 0 then y else inc(rec (dec x) y))
    """
    body = if_(
        eq(V1, ZERO),
        V0,
        App(INC, apply_spine(V2, App(DEC, V1), V0)),
    )
    return App(Y, Lam(Lam(Lam(body))))


def sub_program():
    """max(x - y, 0) by counting down the second argument."""
    body = if_(
        eq(V0, ZERO),
        V1,
        App(DEC, apply_spine(V2, V1, App(DEC, V0))),
    )
    return App(Y, Lam(Lam(Lam(body))))


def mul_program(plus=None):
    """x * y as repeated addition; `plus` defaults to a library reference."""
    if plus is None:
        plus = Comb("add", add_program())
    body = if_(
        eq(V1, ZERO),
        ZERO,
        apply_spine(plus, V0, apply_spine(V2, App(DEC, V1), V0)),
    )
    return App(Y, Lam(Lam(Lam(body))))


def div_program(minus=None):
    """Exact division by counting subtractions of the divisor."""
    if minus is None:
        minus = Comb("sub", sub_program())
    body = if_(
        eq(V1, ZERO),
        ZERO,
        App(INC, apply_spine(V2, apply_spine(minus, V1, V0), V0)),
    )
    return App(Y, Lam(Lam(Lam(body))))


def arithmetic_table():
    """Name -> program map for the four operators."""
    plus = add_program()
    minus = sub_program()
    return {
        "+": plus,
        "-": minus,
        "*": mul_program(Comb("add", plus)),
        "/": div_program(Comb("sub", minus)),
    }


def cons_token(tok: str):
    """lam x. cons tok x: prefix a fixed token (Nothing tail acts as nil)."""
    return Lam(apply_spine(CONS, LitTok(tok), V0))


def concat_pair():
    """lam x. lam y. x ++ y."""
    return Lam(Lam(apply_spine(CONCAT, V1, V0)))


def concat_flip():
    """lam x. lam y. y ++ x."""
    return Lam(Lam(apply_spine(CONCAT, V0, V1)))


def double_list():
    """lam x. x ++ x."""
    return Lam(apply_spine(CONCAT, V0, V0))


def triple_list():
    """lam x. (x ++ x) ++ x."""
    return Lam(apply_spine(CONCAT, apply_spine(CONCAT, V0, V0), V0))


def reverse_program():
    """Structural reversal via the fixpoint combinator."""
    body = if_(
        eq(V0, NIL),
        NIL,
        apply_spine(
            CONCAT,
            App(V1, App(CDR, V0)),
            apply_spine(CONS, App(CAR, V0), NIL),
        ),
    )
    return App(Y, Lam(Lam(body)))
