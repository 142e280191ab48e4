"""Bottom-up search space for candidate programs.

Candidates are assembled from a first-order fragment: argument
variables, harvested literals, the arithmetic and list primitives, and
previously accepted programs as single-node library references.
Expressions are generated smallest-first and deduplicated by their
outcome vector on the training examples (observational equivalence), so
each pool keeps one minimal representative per observable behavior.

Conditionals never nest inside pool expressions; they appear only at
the top of a guarded candidate.  Recursion enters only through the
fixpoint sketch

    Y (lam rec. lam a1 ... lam ak. if COND then BASE else STEP)

with exactly one recursive call inside STEP.  Recursive-call argument
tuples are ordered so that descent on an earlier argument position is
tried first; together with the plain-operand-first wrapping order this
steers repeated-addition programs toward the linear-cost orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .interpreter import EvalError, EvalLimits, evaluate
from .terms import (
    App,
    Lam,
    LitInt,
    LitList,
    LitTok,
    NOTHING_TERM,
    Prim,
    Var,
    apply_spine,
    format_term,
    lambda_arity,
)
from .values import NOTHING, IntV, ListV, TokenV


class _Sentinel:
    __slots__ = ("label",)

    def __init__(self, label):
        self.label = label

    def __repr__(self):
        return "<%s>" % self.label


ERR = _Sentinel("err")
UNKNOWN = _Sentinel("unknown")


@dataclass(frozen=True)
class SearchBudget:
    """Caps for one induction call.

    Sizes are program-term node counts.  `example_cap` bounds how many
    distinct examples drive outcome vectors during search; the full set
    is always used for final verification.  `time_limit` (seconds) cuts
    a search off early and therefore trades determinism for wall clock;
    it stays None everywhere determinism matters.
    """

    max_term_size: int = 18
    cond_size: int = 7
    base_size: int = 6
    step_size: int = 15
    rec_arg_size: int = 5
    rec_plain_size: int = 7
    example_cap: int = 64
    max_candidates: int = 2_000_000
    pool_cap: int = 150_000
    rec_pool_cap: int = 40_000
    tolerance: float = 0.05
    search_limits: EvalLimits = EvalLimits(20_000, 400)
    max_rounds: int = 4
    time_limit: float | None = None


class BudgetExhausted(Exception):
    pass


class _Counter:
    """Candidate counter shared across the pools of one search."""

    __slots__ = ("n", "cap")

    def __init__(self, cap):
        self.n = 0
        self.cap = cap

    def tick(self):
        self.n += 1
        if self.n > self.cap:
            raise BudgetExhausted("candidate budget exceeded")


class Entry:
    """One pooled expression with its outcome vector."""

    __slots__ = ("term", "size", "vec", "bucket", "has_rec")

    def __init__(self, term, size, vec, bucket, has_rec=False):
        self.term = term
        self.size = size
        self.vec = vec
        self.bucket = bucket
        self.has_rec = has_rec

    def __repr__(self):
        return "Entry(%s, size=%d)" % (format_term(self.term), self.size)


def outcome_bucket(v) -> str:
    if v is NOTHING:
        return "nothing"
    t = type(v)
    if t is IntV:
        return "int"
    if t is TokenV:
        return "tok"
    if t is ListV:
        return "list"
    raise TypeError("not a value: %r" % (v,))


def vec_bucket(vec) -> str | None:
    """Coarse type of a vector: the shared bucket of its concrete
    outcomes, "mixed" when they disagree, None when nothing concrete."""
    kinds = set()
    for v in vec:
        if v is ERR or v is UNKNOWN:
            continue
        kinds.add(outcome_bucket(v))
    if not kinds:
        return None
    if len(kinds) == 1:
        return kinds.pop()
    return "mixed"


# inline mirrors of the interpreter's primitive semantics; the final
# interpreter verification in the induction layer is authoritative if
# these ever disagree
def _apply1(name, v):
    if name == "inc":
        return IntV(v.n + 1) if type(v) is IntV else ERR
    if name == "dec":
        if type(v) is not IntV:
            return ERR
        return IntV(v.n - 1 if v.n > 0 else 0)
    if name == "car":
        if type(v) is ListV and v.items:
            return v.items[0]
        return ERR
    if name == "cdr":
        if type(v) is ListV and v.items:
            return ListV(v.items[1:])
        return ERR
    raise ValueError(name)


def _apply2(name, a, b):
    if name == "cons":
        if type(b) is ListV:
            return ListV((a,) + b.items)
        if b is NOTHING:
            return ListV((a,))
        return ERR
    if name == "concat":
        ia = a.items if type(a) is ListV else () if a is NOTHING else None
        ib = b.items if type(b) is ListV else () if b is NOTHING else None
        if ia is None or ib is None:
            return ERR
        return ListV(ia + ib)
    if name == "==":
        return a == b
    raise ValueError(name)


def _vec1(name, vec):
    out = []
    keep = False
    for v in vec:
        if v is ERR:
            out.append(ERR)
        elif v is UNKNOWN:
            out.append(UNKNOWN)
            keep = True
        else:
            r = _apply1(name, v)
            if r is not ERR:
                keep = True
            out.append(r)
    return tuple(out) if keep else None


def _vec2(name, va, vb):
    out = []
    keep = False
    for a, b in zip(va, vb):
        if a is ERR or b is ERR:
            out.append(ERR)
        elif a is UNKNOWN or b is UNKNOWN:
            out.append(UNKNOWN)
            keep = True
        else:
            r = _apply2(name, a, b)
            if r is not ERR:
                keep = True
            out.append(r)
    return tuple(out) if keep else None


def _vec_comb(comb, arg_vecs, limits, memo=None):
    out = []
    keep = False
    for vals in zip(*arg_vecs):
        if any(v is ERR for v in vals):
            out.append(ERR)
        elif any(v is UNKNOWN for v in vals):
            out.append(UNKNOWN)
            keep = True
        else:
            if memo is None:
                r = _run_comb(comb, vals, limits)
            else:
                key = (comb.name, vals)
                r = memo.get(key)
                if r is None:
                    r = _run_comb(comb, vals, limits)
                    memo[key] = r
            if r is not ERR:
                keep = True
            out.append(r)
    return tuple(out) if keep else None


def _run_comb(comb, vals, limits):
    try:
        return evaluate(comb, vals, limits)
    except EvalError:
        return ERR


_PROBE_VALUES = {
    "int": IntV(3),
    "tok": TokenV("a"),
    "list": ListV((TokenV("a"), TokenV("b"))),
    "nothing": NOTHING,
}


def comb_arg_buckets(comb, limits):
    """Buckets each argument position of a library program accepts,
    discovered by probing; "mixed" operands are always allowed."""
    arity = lambda_arity(comb)
    names = sorted(_PROBE_VALUES)
    ok = [set() for _ in range(arity)]
    for combo in product(names, repeat=arity):
        vals = tuple(_PROBE_VALUES[n] for n in combo)
        try:
            evaluate(comb, vals, limits)
        except EvalError:
            continue
        for pos, n in enumerate(combo):
            ok[pos].add(n)
    return [frozenset(s) for s in ok]


class Pool:
    def __init__(self):
        self.entries = []
        self.by_size = {}
        self.seen = {}
        self.truncated = False

    def add(self, entry, dedup=True):
        if dedup:
            if entry.vec in self.seen:
                return False
            self.seen[entry.vec] = entry
        self.entries.append(entry)
        self.by_size.setdefault(entry.size, []).append(entry)
        return True

    def sized(self, size):
        return self.by_size.get(size, ())

    def upto(self, size):
        for s in sorted(self.by_size):
            if s > size:
                break
            yield from self.by_size[s]


def harvest_literals(examples, list_cap=6):
    """Literal terms justified by the example set.

    A constant target value comes in whole; a shared first or last
    token of list targets comes in as a one-token list and a bare
    token.  Examples are (args, result, weight) triples.
    """
    targets = [r for _, r, _ in examples]
    literals = []
    seen = set()

    def put(term):
        key = format_term(term)
        if key not in seen:
            seen.add(key)
            literals.append(term)

    if targets and all(t == targets[0] for t in targets):
        v = targets[0]
        if type(v) is IntV:
            put(LitInt(v.n))
        elif type(v) is TokenV:
            put(LitTok(v.tok))
        elif type(v) is ListV and len(v.items) <= list_cap:
            if all(type(i) is TokenV for i in v.items):
                put(LitList(tuple(i.tok for i in v.items)))
    lists = [t for t in targets if type(t) is ListV and t.items]
    if lists and len(lists) == len(targets):
        for pick in (lambda t: t.items[0], lambda t: t.items[-1]):
            toks = {pick(t) for t in lists}
            if len(toks) == 1:
                tok = toks.pop()
                if type(tok) is TokenV:
                    put(LitList((tok.tok,)))
                    put(LitTok(tok.tok))
    literals.sort(key=format_term)
    return literals


_UNARY = ("inc", "dec", "car", "cdr")
_BINARY = ("cons", "concat")
_INTISH = ("int", "mixed")
_LISTISH = ("list", "mixed")
_TAILISH = ("list", "nothing", "mixed")


def build_value_pool(
    envs,
    arity,
    literals,
    library,
    cap,
    counter,
    limits,
    dedup=True,
    raw=False,
    pool_cap=150_000,
    int_only=False,
):
    """Expressions up to `cap` nodes with their outcome vectors.

    `envs` holds one adapted argument tuple per example.  With raw=True
    every type filter and the deduplication are disabled; oracle tests
    count the unfiltered stream against an independent recurrence.
    With int_only=True the list fragment stays out of the pool, which
    a caller may request when every argument and target is a number.
    """
    n = len(envs)
    pool = Pool()

    def emit(term, size, vec):
        counter.tick()
        if vec is None:
            # the builders collapse an everywhere-failing vector to
            # None; raw mode reconstructs it so the stream stays a
            # purely syntactic enumeration
            if not raw:
                return
            vec = (ERR,) * n
        if not raw and len(pool.entries) >= pool_cap:
            pool.truncated = True
            raise BudgetExhausted("value pool full")
        pool.add(Entry(term, size, vec, vec_bucket(vec)), dedup=dedup and not raw)

    memo = {}
    try:
        _fill_value_pool(
            envs, arity, literals, library, cap, counter, limits, raw, pool_cap,
            int_only, pool, emit, memo,
        )
    except BudgetExhausted:
        pool.truncated = True
    return pool


def _fill_value_pool(
    envs, arity, literals, library, cap, counter, limits, raw, pool_cap,
    int_only, pool, emit, memo,
):
    n = len(envs)
    unary = ("inc", "dec") if int_only else _UNARY
    binary = () if int_only else _BINARY

    # leftmost argument first: position j binds Var(arity-1-j)
    for j in range(arity):
        emit(Var(arity - 1 - j), 1, tuple(env[j] for env in envs))
    emit(Prim("0"), 1, (IntV(0),) * n)
    if not int_only:
        emit(Prim("nil"), 1, (ListV(()),) * n)
        emit(NOTHING_TERM, 1, (NOTHING,) * n)
    for lit in literals:
        if type(lit) is LitInt:
            vec = (IntV(lit.n),) * n
        elif type(lit) is LitTok:
            vec = (TokenV(lit.tok),) * n
        else:
            vec = (ListV(tuple(TokenV(t) for t in lit.tokens)),) * n
        emit(lit, 1, vec)

    lib = []
    for comb in library:
        m = lambda_arity(comb)
        if m == 0:
            continue
        lib.append((comb, m, comb_arg_buckets(comb, limits)))

    for s in range(2, cap + 1):
        if len(pool.entries) > pool_cap:
            pool.truncated = True
            break
        for name in unary:
            want = _INTISH if name in ("inc", "dec") else _LISTISH
            for e in pool.sized(s - 2):
                if not raw and e.bucket not in want:
                    continue
                emit(App(Prim(name), e.term), s, _vec1(name, e.vec))
        for name in binary:
            for a in range(1, s - 3):
                b = s - 3 - a
                for ea in pool.sized(a):
                    if not raw and name == "concat" and ea.bucket not in _TAILISH:
                        continue
                    for eb in pool.sized(b):
                        if not raw and eb.bucket not in _TAILISH:
                            continue
                        emit(
                            apply_spine(Prim(name), ea.term, eb.term),
                            s,
                            _vec2(name, ea.vec, eb.vec),
                        )
        for comb, m, sig in lib:
            need = s - 1 - m
            if need < m:
                continue
            for split in _compositions(need, m):
                for ops in _operand_product(pool, split, sig, raw):
                    emit(
                        apply_spine(comb, *(o.term for o in ops)),
                        s,
                        _vec_comb(comb, [o.vec for o in ops], limits, memo),
                    )


def _compositions(total, parts):
    """Ordered positive size splits, ascending lexicographically."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _operand_product(pool, sizes, sig, raw):
    cands = []
    for pos, sz in enumerate(sizes):
        ok = [
            e
            for e in pool.sized(sz)
            if raw or e.bucket == "mixed" or e.bucket in sig[pos]
        ]
        if not ok:
            return
        cands.append(ok)
    idx = [0] * len(cands)
    while True:
        yield tuple(c[i] for c, i in zip(cands, idx))
        for p in range(len(idx) - 1, -1, -1):
            idx[p] += 1
            if idx[p] < len(cands[p]):
                break
            idx[p] = 0
        else:
            return


def build_bool_pool(pool, cond_cap, counter):
    """Equality tests usable as sketch guards.

    Degenerate guards are dropped: one that never fires on the examples
    cannot anchor a base case, and one that always fires is a plain
    program in disguise.
    """
    out = Pool()
    try:
        for sa in range(1, cond_cap - 3):
            for ea in pool.sized(sa):
                for sb in range(1, cond_cap - 2 - sa):
                    for eb in pool.sized(sb):
                        if (
                            ea.bucket != eb.bucket
                            and "mixed" not in (ea.bucket, eb.bucket)
                            and "nothing" not in (ea.bucket, eb.bucket)
                        ):
                            continue
                        counter.tick()
                        vec = _vec2("==", ea.vec, eb.vec)
                        if vec is None:
                            continue
                        if True not in vec or False not in vec:
                            continue
                        out.add(
                            Entry(
                                apply_spine(Prim("=="), ea.term, eb.term),
                                3 + sa + sb,
                                vec,
                                "bool",
                            )
                        )
    except BudgetExhausted:
        out.truncated = True
    return out


def build_rec_pool(
    arity, pool, example_map, budget, counter, library=(), limits=None, int_only=False
):
    """STEP expressions containing exactly one recursive call.

    A recursive call's outcome is looked up in the example map when its
    argument values match a known input, otherwise it is UNKNOWN; the
    induction layer uses the known outcomes to reject candidates
    cheaply before touching the interpreter.
    """
    if arity == 0:
        return Pool()
    rec_var = Var(arity)
    var_terms = [Var(arity - 1 - j) for j in range(arity)]
    var_buckets = []
    for j in range(arity):
        found = None
        for e in pool.sized(1):
            if e.term == var_terms[j]:
                found = e
                break
        var_buckets.append(found.bucket if found is not None else "mixed")

    arg_cands = []
    for j in range(arity):
        ok = [
            e
            for e in pool.upto(budget.rec_arg_size)
            if e.bucket == var_buckets[j] or "mixed" in (e.bucket, var_buckets[j])
        ]
        if not ok:
            return Pool()
        arg_cands.append(ok)

    rec = Pool()
    memo = {}
    try:
        _fill_rec_pool(
            arity, pool, example_map, budget, counter, library, limits,
            int_only, rec_var, var_terms, arg_cands, rec, memo,
        )
    except BudgetExhausted:
        rec.truncated = True
    return rec


def _fill_rec_pool(
    arity, pool, example_map, budget, counter, library, limits,
    int_only, rec_var, var_terms, arg_cands, rec, memo,
):
    unary = ("inc", "dec") if int_only else _UNARY
    binary = () if int_only else _BINARY

    # wrap bookkeeping: entry id -> (wrap count, saw a multi-operand
    # wrap).  Stacked contexts around the call site explode the pool
    # while every worthwhile step uses at most one shallow context, so
    # wraps stop at two and only one may take a second operand.
    meta = {}

    def radd(entry, wraps, multi):
        if len(rec.entries) >= budget.rec_pool_cap:
            rec.truncated = True
            raise BudgetExhausted("recursion pool full")
        meta[id(entry)] = (wraps, multi)
        rec.add(entry, dedup=False)

    tuples = []
    for idx in product(*(range(len(c)) for c in arg_cands)):
        ops = tuple(arg_cands[j][idx[j]] for j in range(arity))
        pattern = tuple(0 if ops[j].term == var_terms[j] else 1 for j in range(arity))
        if not any(pattern):
            continue  # calling on the same arguments never terminates
        size = arity + 1 + sum(o.size for o in ops)
        if size > budget.step_size:
            continue
        tuples.append((size, pattern.index(1), idx, ops))
    tuples.sort(key=lambda t: t[:3])

    n = len(next(iter(pool.sized(1))).vec) if pool.sized(1) else 0
    for size, _, _, ops in tuples:
        counter.tick()
        term = apply_spine(rec_var, *(o.term for o in ops))
        vec = []
        for i in range(n):
            vals = tuple(o.vec[i] for o in ops)
            if any(v is ERR for v in vals):
                vec.append(ERR)
            elif any(v is UNKNOWN for v in vals):
                vec.append(UNKNOWN)
            else:
                vec.append(example_map.get(vals, UNKNOWN))
        radd(Entry(term, size, tuple(vec), "mixed", has_rec=True), 0, False)

    lib2 = [c for c in library if lambda_arity(c) == 2]

    # close under wraps, keeping exactly one recursive call per term;
    # the plain operand takes the left position first
    for s in range(2, budget.step_size + 1):
        for name in unary:
            for e in list(rec.sized(s - 2)):
                wraps, multi = meta[id(e)]
                if wraps >= 2:
                    continue
                counter.tick()
                vec = _vec1(name, e.vec)
                if vec is not None:
                    entry = Entry(App(Prim(name), e.term), s, vec, "mixed", True)
                    radd(entry, wraps + 1, multi)
        for name in binary:
            for a in range(1, s - 3):
                b = s - 3 - a
                for ea, eb in _plain_rec_pairs(pool, rec, a, b, budget.rec_plain_size):
                    side = ea if ea.has_rec else eb
                    wraps, multi = meta[id(side)]
                    if wraps >= 2 or multi:
                        continue
                    counter.tick()
                    vec = _vec2(name, ea.vec, eb.vec)
                    if vec is not None:
                        entry = Entry(
                            apply_spine(Prim(name), ea.term, eb.term),
                            s,
                            vec,
                            "mixed",
                            True,
                        )
                        radd(entry, wraps + 1, True)
        for comb in lib2:
            need = s - 3
            for a in range(1, need):
                b = need - a
                for ea, eb in _plain_rec_pairs(pool, rec, a, b, budget.rec_plain_size):
                    side = ea if ea.has_rec else eb
                    wraps, multi = meta[id(side)]
                    if wraps >= 2 or multi:
                        continue
                    counter.tick()
                    vec = _vec_comb(comb, [ea.vec, eb.vec], limits, memo)
                    if vec is not None:
                        entry = Entry(
                            apply_spine(comb, ea.term, eb.term),
                            s,
                            vec,
                            "mixed",
                            True,
                        )
                        radd(entry, wraps + 1, True)


def _plain_rec_pairs(pool, rec, a, b, plain_cap):
    """Pairs mixing one plain and one recursive operand; the plain
    side stays small, which is what every useful step shape needs."""
    if a <= plain_cap:
        snapshot = list(rec.sized(b))
        for eb in snapshot:
            for ea in pool.sized(a):
                yield ea, eb
    if b <= plain_cap:
        snapshot = list(rec.sized(a))
        for ea in snapshot:
            for eb in pool.sized(b):
                yield ea, eb


def if_spine(cond, then, other):
    return apply_spine(Prim("if"), cond, then, other)


def assemble_plain(arity, term):
    for _ in range(arity):
        term = Lam(term)
    return term


def assemble_guarded(arity, cond, base, step):
    return assemble_plain(arity, if_spine(cond, base, step))


def assemble_recursive(arity, cond, base, step):
    body = if_spine(cond, base, step)
    inner = body
    for _ in range(arity + 1):
        inner = Lam(inner)
    return App(Prim("Y"), inner)


def guarded_size(arity, cond, base, step):
    return arity + 4 + cond.size + base.size + step.size


def recursive_size(arity, cond, base, step):
    return arity + 7 + cond.size + base.size + step.size
