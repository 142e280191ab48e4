"""Program terms.

Programs are closed lambda-calculus terms over a fixed primitive set, with
de Bruijn variables and a handful of literal forms.  The primitive set is
deliberately tiny: Peano arithmetic (0, inc, dec), equality, a lazy
conditional, list structure (cons, car, cdr, nil, concat), and the
fixpoint combinator Y for recursion.

Canonical serialization is an s-expression; parse and print round-trip
byte-identically on canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Var:
    ix: int


@dataclass(frozen=True, slots=True)
class Lam:
    body: object


@dataclass(frozen=True, slots=True)
class App:
    fun: object
    arg: object


@dataclass(frozen=True, slots=True)
class Prim:
    name: str


@dataclass(frozen=True, slots=True)
class LitInt:
    n: int


@dataclass(frozen=True, slots=True)
class LitTok:
    tok: str


@dataclass(frozen=True, slots=True)
class LitList:
    tokens: tuple


@dataclass(frozen=True, slots=True)
class LitNothing:
    pass


@dataclass(frozen=True, slots=True)
class Comb:
    """Named reference to an accepted library program.

    Counts as a single node for sizing; serialization inlines the
    definition so table files stay plain base-calculus s-expressions.
    """

    name: str
    defn: object


Term = object  # union of the above; alias for annotations

NOTHING_TERM = LitNothing()

# name -> number of arguments consumed when fully applied
PRIM_ARITY = {
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

PRIM_NAMES = frozenset(PRIM_ARITY)


def program_size(term) -> int:
    """Node count; a library reference costs one node."""
    t = type(term)
    if t is App:
        return 1 + program_size(term.fun) + program_size(term.arg)
    if t is Lam:
        return 1 + program_size(term.body)
    return 1


def lambda_arity(term) -> int:
    """Number of arguments the program consumes.

    Leading lambdas dominate; a fixpoint program Y (lam rec. ...) takes
    one argument fewer than its binder count; a bare primitive or
    library reference falls back to its own arity.
    """
    while type(term) is Comb:
        term = term.defn
    if type(term) is App and type(term.fun) is Prim and term.fun.name == "Y":
        return max(lambda_arity(term.arg) - 1, 0)
    n = 0
    while type(term) is Lam:
        n += 1
        term = term.body
    if n == 0:
        if type(term) is Prim:
            return PRIM_ARITY[term.name]
        if type(term) is Comb:
            return lambda_arity(term)
    return n


def expand_combs(term):
    """Inline all library references, producing a base-calculus term."""
    t = type(term)
    if t is Comb:
        return expand_combs(term.defn)
    if t is App:
        return App(expand_combs(term.fun), expand_combs(term.arg))
    if t is Lam:
        return Lam(expand_combs(term.body))
    return term


def prims_used(term) -> frozenset:
    out = set()
    stack = [term]
    while stack:
        t = stack.pop()
        tt = type(t)
        if tt is Prim:
            out.add(t.name)
        elif tt is App:
            stack.append(t.fun)
            stack.append(t.arg)
        elif tt is Lam:
            stack.append(t.body)
        elif tt is Comb:
            stack.append(t.defn)
    return frozenset(out)


def format_term(term) -> str:
    """Canonical s-expression; library references are inlined."""
    parts = []
    _fmt(expand_combs(term), parts)
    return "".join(parts)


def _fmt(term, out) -> None:
    t = type(term)
    if t is Var:
        out.append("(var %d)" % term.ix)
    elif t is Lam:
        out.append("(lam ")
        _fmt(term.body, out)
        out.append(")")
    elif t is App:
        out.append("(app ")
        _fmt(term.fun, out)
        out.append(" ")
        _fmt(term.arg, out)
        out.append(")")
    elif t is Prim:
        out.append(term.name)
    elif t is LitInt:
        out.append("(int %d)" % term.n)
    elif t is LitTok:
        out.append("(tok %s)" % term.tok)
    elif t is LitList:
        if term.tokens:
            out.append("(list %s)" % " ".join(term.tokens))
        else:
            out.append("(list)")
    elif t is LitNothing:
        out.append("nothing")
    else:
        raise TypeError("not a term: %r" % (term,))


class TermSyntaxError(ValueError):
    pass


def parse_term(text: str):
    """Parse the s-expression form produced by :func:`format_term`."""
    toks = _lex(text)
    term, pos = _parse_sexpr(toks, 0)
    if pos != len(toks):
        raise TermSyntaxError("trailing tokens in %r" % text)
    return term


def _lex(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append(c)
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def _parse_sexpr(toks, pos):
    if pos >= len(toks):
        raise TermSyntaxError("unexpected end of input")
    tok = toks[pos]
    if tok == ")":
        raise TermSyntaxError("unexpected )")
    if tok != "(":
        return _parse_atom(tok), pos + 1
    pos += 1
    if pos >= len(toks):
        raise TermSyntaxError("unterminated form")
    head = toks[pos]
    pos += 1
    if head == "var" or head == "int":
        if pos >= len(toks) or not toks[pos].lstrip("-").isdigit():
            raise TermSyntaxError("%s needs an integer" % head)
        val = int(toks[pos])
        pos += 1
        term = Var(val) if head == "var" else LitInt(val)
    elif head == "tok":
        if pos >= len(toks):
            raise TermSyntaxError("tok needs a token")
        term = LitTok(toks[pos])
        pos += 1
    elif head == "list":
        items = []
        while pos < len(toks) and toks[pos] != ")":
            items.append(toks[pos])
            pos += 1
        term = LitList(tuple(items))
    elif head == "lam":
        body, pos = _parse_sexpr(toks, pos)
        term = Lam(body)
    elif head == "app":
        fun, pos = _parse_sexpr(toks, pos)
        arg, pos = _parse_sexpr(toks, pos)
        term = App(fun, arg)
    else:
        raise TermSyntaxError("unknown form %r" % head)
    if pos >= len(toks) or toks[pos] != ")":
        raise TermSyntaxError("missing ) after %s" % head)
    return term, pos + 1


def _parse_atom(tok):
    if tok in PRIM_NAMES:
        return Prim(tok)
    if tok == "nothing":
        return NOTHING_TERM
    if tok.isdigit():
        return LitInt(int(tok))
    raise TermSyntaxError("unknown atom %r" % tok)


def apply_spine(fun, *args):
    """Left-nested application helper: apply_spine(f, a, b) == ((f a) b)."""
    t = fun
    for a in args:
        t = App(t, a)
    return t
