"""Program evaluation.

A small abstract machine evaluates terms call-by-value with an explicit
continuation stack, so object-level recursion depth is bounded by the
configured budget rather than the host stack.  Induced arithmetic runs
Peano-style and can unroll thousands of recursive calls; that must not
crash the process.

Two budgets are enforced: a step budget counting every function or
primitive application, and a recursion-depth budget counting nested
fixpoint unrolls.  `if` is a lazy special form (only the selected branch
is evaluated) and `==` produces an opaque boolean consumed only by `if`.

Everything here is pure and deterministic; evaluators may run
concurrently on shared immutable terms and tables.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    App,
    Comb,
    Lam,
    LitInt,
    LitList,
    LitNothing,
    LitTok,
    Prim,
    PRIM_ARITY,
    Var,
    lambda_arity,
)
from .values import NOTHING, IntV, ListV, TokenV, is_value


class EvalError(Exception):
    """Base class for evaluation failures."""


class StepBudgetExceeded(EvalError):
    pass


class RecursionLimitExceeded(EvalError):
    pass


class TypeMismatch(EvalError):
    pass


class UnboundVariable(EvalError):
    pass


class MissingProgram(EvalError):
    pass


class ValueSizeExceeded(EvalError):
    pass


class TreeEvalError(EvalError):
    """Evaluation failure annotated with the offending node."""

    def __init__(self, node, cause):
        super().__init__("node %d: %s" % (node, cause))
        self.node = node
        self.cause = cause


@dataclass(frozen=True, slots=True)
class EvalLimits:
    max_steps: int = 10_000
    max_recursion_depth: int = 200
    max_list_length: int = 10_000


DEFAULT_LIMITS = EvalLimits()


class _Closure:
    __slots__ = ("body", "env")

    def __init__(self, body, env):
        self.body = body
        self.env = env


class _PrimPart:
    __slots__ = ("name", "args")

    def __init__(self, name, args):
        self.name = name
        self.args = args


class _RecFn:
    """Fixpoint of a function, accumulating arguments until saturation.

    Expanding only at saturation lets the depth marker span the whole
    body evaluation; expanding per curried argument would pop it while
    the body is still pending and the depth budget would never bind.
    """

    __slots__ = ("fn", "arity", "args", "base")

    def __init__(self, fn, arity, args=(), base=None):
        self.fn = fn
        self.arity = arity
        self.args = args
        self.base = base if base is not None else self


class _Bool:
    __slots__ = ("b",)

    def __init__(self, b):
        self.b = b


def _applicable(v) -> bool:
    return isinstance(v, (_Closure, _PrimPart, _RecFn))


def reduce_prim(name, args):
    """Apply a saturated primitive to runtime values.

    Nothing acts as the empty list for cons tails and concat operands;
    every other type violation raises TypeMismatch.
    """
    if name == "inc":
        (a,) = args
        if type(a) is not IntV:
            raise TypeMismatch("inc of %r" % (a,))
        return IntV(a.n + 1)
    if name == "dec":
        (a,) = args
        if type(a) is not IntV:
            raise TypeMismatch("dec of %r" % (a,))
        return IntV(a.n - 1 if a.n > 0 else 0)
    if name == "==":
        a, b = args
        if not is_value(a) or not is_value(b):
            raise TypeMismatch("== of non-values")
        return _Bool(a == b)
    if name == "cons":
        a, b = args
        if not is_value(a):
            raise TypeMismatch("cons of non-value head")
        if type(b) is ListV:
            return ListV((a,) + b.items)
        if b is NOTHING:
            return ListV((a,))
        raise TypeMismatch("cons onto %r" % (b,))
    if name == "car":
        (a,) = args
        if type(a) is ListV and a.items:
            return a.items[0]
        raise TypeMismatch("car of %r" % (a,))
    if name == "cdr":
        (a,) = args
        if type(a) is ListV and a.items:
            return ListV(a.items[1:])
        raise TypeMismatch("cdr of %r" % (a,))
    if name == "concat":
        a, b = args
        ia = a.items if type(a) is ListV else () if a is NOTHING else None
        ib = b.items if type(b) is ListV else () if b is NOTHING else None
        if ia is None or ib is None:
            raise TypeMismatch("concat of %r and %r" % (a, b))
        return ListV(ia + ib)
    if name == "Y":
        (f,) = args
        if not _applicable(f):
            raise TypeMismatch("Y of non-function")
        arity = 1
        if type(f) is _Closure:
            body, arity = f.body, 0
            while type(body) is Lam:
                arity += 1
                body = body.body
            arity = max(arity, 1)
        return _RecFn(f, arity)
    raise TypeMismatch("cannot reduce primitive %r" % name)


# continuation tags
_K_ARG = 0   # (tag, argterm, env): function value ready, evaluate argument
_K_APP = 1   # (tag, funvalue): argument value ready, apply
_K_RAP = 2   # (tag, argvalue): function value ready, apply to stored value
_K_IF = 3    # (tag, then_term, else_term, env)
_K_DEP = 4   # recursion depth pop marker


def _run(term, konts, limits):
    max_steps = limits.max_steps
    max_depth = limits.max_recursion_depth
    max_list = limits.max_list_length
    steps = 0
    depth = 0
    cur = term
    cur_env = None
    is_val = False
    while True:
        if not is_val:
            t = cur
            tt = type(t)
            if tt is Var:
                e = cur_env
                ix = t.ix
                while ix > 0 and e is not None:
                    e = e[1]
                    ix -= 1
                if e is None:
                    raise UnboundVariable("unbound variable %d" % t.ix)
                cur = e[0]
                is_val = True
            elif tt is App:
                f1 = t.fun
                if (
                    type(f1) is App
                    and type(f1.fun) is App
                    and type(f1.fun.fun) is Prim
                    and f1.fun.fun.name == "if"
                ):
                    konts.append((_K_IF, f1.arg, t.arg, cur_env))
                    cur = f1.fun.arg
                else:
                    konts.append((_K_ARG, t.arg, cur_env))
                    cur = f1
            elif tt is Lam:
                cur = _Closure(t.body, cur_env)
                is_val = True
            elif tt is Prim:
                name = t.name
                if name == "0":
                    cur = IntV(0)
                elif name == "nil":
                    cur = ListV(())
                elif name == "if":
                    raise TypeMismatch("if requires a full three-argument application")
                else:
                    cur = _PrimPart(name, ())
                is_val = True
            elif tt is LitInt:
                if t.n < 0:
                    raise TypeMismatch("negative integer literal")
                cur = IntV(t.n)
                is_val = True
            elif tt is LitTok:
                cur = TokenV(t.tok)
                is_val = True
            elif tt is LitList:
                cur = ListV(tuple(TokenV(x) for x in t.tokens))
                is_val = True
            elif tt is LitNothing:
                cur = NOTHING
                is_val = True
            elif tt is Comb:
                cur = t.defn
                cur_env = None
            else:
                raise TypeMismatch("not a term: %r" % (t,))
            continue

        if not konts:
            return cur, steps

        k = konts.pop()
        kt = k[0]
        if kt is _K_ARG:
            konts.append((_K_APP, cur))
            cur = k[1]
            cur_env = k[2]
            is_val = False
            continue
        if kt is _K_DEP:
            depth -= 1
            continue
        if kt is _K_IF:
            c = cur
            if type(c) is not _Bool:
                raise TypeMismatch("if condition is not a boolean")
            cur = k[1] if c.b else k[2]
            cur_env = k[3]
            is_val = False
            continue
        if kt is _K_APP:
            fv, av = k[1], cur
        else:  # _K_RAP
            fv, av = cur, k[1]

        steps += 1
        if steps > max_steps:
            raise StepBudgetExceeded("step budget %d exceeded" % max_steps)
        tf = type(fv)
        if tf is _Closure:
            cur = fv.body
            cur_env = (av, fv.env)
            is_val = False
        elif tf is _PrimPart:
            args = fv.args + (av,)
            if len(args) == PRIM_ARITY[fv.name]:
                cur = reduce_prim(fv.name, args)
                # cons and concat are the only growers; without this
                # bound a divergent candidate can double a list per
                # recursion level and exhaust memory within the step
                # budget
                if type(cur) is ListV and len(cur.items) > max_list:
                    raise ValueSizeExceeded(
                        "list of %d items exceeds limit %d"
                        % (len(cur.items), max_list)
                    )
            else:
                cur = _PrimPart(fv.name, args)
        elif tf is _RecFn:
            args = fv.args + (av,)
            if len(args) < fv.arity:
                cur = _RecFn(fv.fn, fv.arity, args, fv.base)
            else:
                depth += 1
                if depth > max_depth:
                    raise RecursionLimitExceeded(
                        "recursion depth %d exceeded" % max_depth
                    )
                konts.append((_K_DEP,))
                for a in reversed(args):
                    konts.append((_K_RAP, a))
                konts.append((_K_RAP, fv.base))
                cur = fv.fn
        else:
            raise TypeMismatch("applying a non-function value")


def evaluate(term, args=(), limits=DEFAULT_LIMITS):
    """Evaluate a closed term applied to the given argument values.

    Returns the resulting Value; a functional or boolean result raises
    TypeMismatch, as do all type violations.  Deterministic: equal terms,
    arguments and limits always produce the same outcome.
    """
    for a in args:
        if not is_value(a):
            raise TypeMismatch("argument %r is not a value" % (a,))
    konts = [(_K_RAP, a) for a in reversed(tuple(args))]
    v, _ = _run(term, konts, limits)
    if not is_value(v):
        raise TypeMismatch("program produced a non-value result")
    return v


def adapt_args(args, arity):
    """Match a child-value list to a program arity.

    Nothing-valued arguments are dropped when there are too many, and
    missing arguments are padded with Nothing; a surplus of real values
    is a type error.
    """
    args = list(args)
    if len(args) > arity:
        args = [a for a in args if a is not NOTHING]
        if len(args) > arity:
            raise TypeMismatch(
                "%d arguments for arity-%d program" % (len(args), arity)
            )
    if len(args) < arity:
        args.extend([NOTHING] * (arity - len(args)))
    return args


def evaluate_tree(tree, table, limits=DEFAULT_LIMITS, absorb_errors=False):
    """Fill in node values bottom-up and return the annotated tree.

    Each node's value is its symbol's program applied to the values of
    its children in left-to-right surface order.  With absorb_errors the
    failing node gets the Nothing value and evaluation continues;
    otherwise the failure is raised as TreeEvalError.
    """
    order = tree.postorder()
    values = list(tree.values)
    for node in order:
        sym = tree.symbols[node]
        if sym not in table:
            err = MissingProgram("no program for symbol %d" % sym)
            if absorb_errors:
                values[node] = NOTHING
                continue
            raise TreeEvalError(node, err)
        prog = table[sym]
        try:
            args = adapt_args(
                [values[c] for c in tree.children(node)], lambda_arity(prog)
            )
            values[node] = evaluate(prog, args, limits)
        except EvalError as err:
            if absorb_errors:
                values[node] = NOTHING
            else:
                raise TreeEvalError(node, err) from err
    return tree.with_values(values)
