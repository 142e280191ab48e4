"""Program induction from collected (arguments, result) evidence.

Search runs in three phases over shared expression pools: plain
compositions, guarded compositions (a top-level equality test choosing
between two plain branches), and recursive fixpoint sketches.  Phases
one and two are scored entirely through outcome vectors and bitmask
algebra; phase three filters sketches against recorded outcomes of the
recursive call before running any of them.  Candidates that survive
their phase go through authoritative interpreter verification against
the full example set, so a divergence between the fast vector route
and the interpreter can only cost time, never correctness.

Noise tolerance: a candidate is acceptable when its weighted hit rate
is at least 1 - tolerance, both during search and at verification.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .enumeration import (
    ERR,
    SearchBudget,
    UNKNOWN,
    assemble_guarded,
    assemble_plain,
    assemble_recursive,
    build_bool_pool,
    build_rec_pool,
    build_value_pool,
    guarded_size,
    harvest_literals,
    recursive_size,
    _Counter,
)
from .interpreter import EvalError, EvalLimits, adapt_args, evaluate
from .terms import Comb, format_term, lambda_arity, program_size
from .values import NOTHING, IntV, format_value


@dataclass(frozen=True)
class SemanticExample:
    """One observed call: raw child values and the node's value."""

    args: tuple
    result: object
    weight: float = 1.0


@dataclass(frozen=True)
class InductionResult:
    program: object
    hit_rate: float
    size: int
    arity: int
    candidates: int
    phase: str


class NoCandidateFound(Exception):
    def __init__(self, message, best_program=None, best_rate=0.0, candidates=0):
        super().__init__(message)
        self.best_program = best_program
        self.best_rate = best_rate
        self.candidates = candidates


class _Deadline(Exception):
    pass


_STAGE_ONE_CAP = 11
_VERIFY_CAP = 400
_REC_VERIFY_CAP = 6_000
_REC_KEEP = 40
_REC_AFTER_HIT = 200
_EXTRA_WALK = 32


def _example_key(args, result):
    return (tuple(format_value(a) for a in args), format_value(result))


def _merge_examples(examples):
    """Collapse duplicates, returning (args, result, weight) triples
    sorted by weight (heavy first) then canonical text."""
    acc = {}
    for ex in examples:
        key = _example_key(ex.args, ex.result)
        if key in acc:
            args, result, w = acc[key]
            acc[key] = (args, result, w + ex.weight)
        else:
            acc[key] = (tuple(ex.args), ex.result, float(ex.weight))
    merged = list(acc.items())
    merged.sort(key=lambda kv: (-kv[1][2], kv[0]))
    return [v for _, v in merged]


def _verify_rows(program, rows, limits, allowed_miss, total_weight):
    """Weighted hit rate, or None once the candidate cannot reach the
    acceptance threshold."""
    miss = 0.0
    for env, target, w in rows:
        try:
            hit = evaluate(program, env, limits) == target
        except EvalError:
            hit = False
        if not hit:
            miss += w
            if miss > allowed_miss + 1e-12:
                return None
    return 1.0 - (miss / total_weight if total_weight else 0.0)


def score_program(program, examples, limits=None, arity=None):
    """Weighted hit rate of a program over raw examples."""
    from .interpreter import DEFAULT_LIMITS

    limits = limits or DEFAULT_LIMITS
    merged = _merge_examples(examples)
    if arity is None:
        arity = lambda_arity(program)
    rows = [(tuple(adapt_args(args, arity)), res, w) for args, res, w in merged]
    total = sum(w for _, _, w in rows)
    rate = _verify_rows(program, rows, limits, total, total)
    return rate if rate is not None else 0.0


def _wmask(mask, weights):
    total = 0.0
    i = 0
    while mask:
        if mask & 1:
            total += weights[i]
        mask >>= 1
        i += 1
    return total


@dataclass
class _Candidate:
    rate: float
    size: int
    phase_rank: int
    gen: int
    program: object
    phase: str


class _Search:
    def __init__(self, subset_rows, budget, counter, deadline):
        self.rows = subset_rows
        self.weights = [w for _, _, w in subset_rows]
        self.total = sum(self.weights)
        self.allowed = budget.tolerance * self.total
        self.full_bits = (1 << len(subset_rows)) - 1
        self.budget = budget
        self.counter = counter
        self.deadline = deadline
        self.cands = []
        self.gen = 0

    def check_clock(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Deadline

    def okmask(self, vec):
        mask = 0
        for i, (v, (_, target, _)) in enumerate(zip(vec, self.rows)):
            if v is not ERR and v is not UNKNOWN and v == target:
                mask |= 1 << i
        return mask

    def add(self, rate, size, phase_rank, program, phase):
        self.gen += 1
        if rate >= 1.0 - self.budget.tolerance - 1e-12:
            self.cands.append(_Candidate(rate, size, phase_rank, self.gen, program, phase))

    def plain_phase(self, pool, arity):
        best_perfect = None
        for e in pool.entries:
            mask = self.okmask(e.vec)
            rate = _wmask(mask, self.weights) / self.total if self.total else 0.0
            self.add(rate, arity + e.size, 0, assemble_plain(arity, e.term), "plain")
            if rate >= 1.0 and best_perfect is None:
                best_perfect = arity + e.size
        return best_perfect

    def _base_for(self, pool, true_mask, ok_of):
        for e in pool.upto(self.budget.base_size):
            if true_mask & ~ok_of[id(e)] == 0:
                return e
        return None

    def guarded_phase(self, pool, bools, arity):
        ok_of = {id(e): self.okmask(e.vec) for e in pool.entries}
        step = 0
        for cond in bools.entries:
            true_mask = 0
            false_mask = 0
            err_mask = 0
            for i, v in enumerate(cond.vec):
                if v is True:
                    true_mask |= 1 << i
                elif v is False:
                    false_mask |= 1 << i
                else:
                    err_mask |= 1 << i
            base_miss = _wmask(err_mask, self.weights)
            if base_miss > self.allowed:
                continue
            base = self._base_for(pool, true_mask, ok_of)
            if base is None:
                continue
            need = _wmask(false_mask, self.weights) - (self.allowed - base_miss)
            for s in pool.entries:
                step += 1
                if step % 4096 == 0:
                    self.check_clock()
                s_ok = ok_of[id(s)]
                if need > 0 and false_mask & s_ok == 0:
                    continue
                miss = base_miss + _wmask(false_mask & ~s_ok, self.weights)
                if miss > self.allowed:
                    continue
                rate = 1.0 - miss / self.total
                self.add(
                    rate,
                    guarded_size(arity, cond, base, s),
                    1,
                    assemble_guarded(arity, cond.term, base.term, s.term),
                    "guarded",
                )

    def recursive_phase(self, pool, bools, rec, arity, limits):
        ok_of = {id(e): self.okmask(e.vec) for e in pool.entries}
        rec_bad = {}
        rec_ok = {}
        for e in rec.entries:
            bad = 0
            ok = 0
            for i, (v, (_, target, _)) in enumerate(zip(e.vec, self.rows)):
                if v is UNKNOWN:
                    continue
                if v is ERR or v != target:
                    bad |= 1 << i
                else:
                    ok |= 1 << i
            rec_bad[id(e)] = bad
            rec_ok[id(e)] = ok

        # mask pass: everything the recorded outcomes cannot refute
        survivors = []
        gen = 0
        rec_list = list(rec.upto(self.budget.step_size))
        for cond in bools.entries:
            true_mask = 0
            false_mask = 0
            err_mask = 0
            for i, v in enumerate(cond.vec):
                if v is True:
                    true_mask |= 1 << i
                elif v is False:
                    false_mask |= 1 << i
                else:
                    err_mask |= 1 << i
            base_miss = _wmask(err_mask, self.weights)
            if base_miss > self.allowed:
                continue
            base = self._base_for(pool, true_mask, ok_of)
            if base is None:
                continue
            slack = self.allowed - base_miss
            for s in rec_list:
                gen += 1
                if gen % 8192 == 0:
                    self.check_clock()
                fb = false_mask & rec_bad[id(s)]
                if fb and _wmask(fb, self.weights) > slack:
                    continue
                evidence = _wmask(false_mask & rec_ok[id(s)], self.weights)
                size = recursive_size(arity, cond, base, s)
                survivors.append((-evidence, size, gen, cond, base, s))
            if len(survivors) > 120_000:
                survivors.sort(key=lambda t: t[:3])
                del survivors[40_000:]

        # verify best-evidenced first: a sketch whose recursive calls
        # land on recorded inputs and agree with them outranks one the
        # records cannot check at all
        survivors.sort(key=lambda t: t[:3])
        probe = EvalLimits(
            min(8_000, limits.max_steps),
            min(300, limits.max_recursion_depth),
            min(2_000, limits.max_list_length),
        )
        kept = 0
        first_hit = None
        for verified, (_, size, gen, cond, base, s) in enumerate(survivors):
            if verified >= _REC_VERIFY_CAP or kept >= _REC_KEEP:
                return
            if first_hit is not None and verified - first_hit > _REC_AFTER_HIT:
                return
            if verified % 16 == 0:
                self.check_clock()
            program = assemble_recursive(arity, cond.term, base.term, s.term)
            rate = _verify_rows(program, self.rows, probe, self.allowed, self.total)
            if rate is not None:
                kept += 1
                if first_hit is None:
                    first_hit = verified
                self.cands.append(
                    _Candidate(rate, size, 2, gen, program, "recursive")
                )


def _select(cands, full_rows, limits, tolerance):
    """Walk the shortlist, verifying on the full example set; the
    interpreter's verdict here is what accepts a program."""
    total = sum(w for _, _, w in full_rows)
    allowed = tolerance * total
    threshold = 1.0 - tolerance - 1e-12
    cands.sort(key=lambda c: (-c.rate, c.size, c.phase_rank, c.gen))
    best = None
    best_rate = -1.0
    walked = 0
    extra = 0
    for c in cands:
        if c.rate < threshold:
            break
        walked += 1
        if walked > _VERIFY_CAP:
            break
        full_rate = _verify_rows(c.program, full_rows, limits, allowed, total)
        if full_rate is None:
            continue
        if full_rate >= 1.0:
            return c, 1.0
        if full_rate > best_rate + 1e-12:
            best, best_rate = c, full_rate
        if best is not None:
            extra += 1
            if extra > _EXTRA_WALK:
                break
    if best is None:
        return None, -1.0
    return best, best_rate


def induce(examples, budget=None, library=(), arity=None, incumbent=None):
    """Search for a program consistent with the examples.

    Returns an InductionResult or raises NoCandidateFound.  `library`
    holds named single-node references to already accepted programs;
    `incumbent` short-circuits the search when it still explains
    everything.
    """
    budget = budget or SearchBudget()
    library = tuple(
        c if type(c) is Comb else Comb("lib%d" % i, c)
        for i, c in enumerate(library)
    )
    merged = _merge_examples(examples)
    if not merged:
        raise NoCandidateFound("no examples")
    if arity is None:
        arity = max(sum(1 for a in args if a is not NOTHING) for args, _, _ in merged)

    full_rows = [(tuple(adapt_args(args, arity)), res, w) for args, res, w in merged]
    full_total = sum(w for _, _, w in full_rows)
    allowed_full = budget.tolerance * full_total
    limits = budget.search_limits

    counter = _Counter(budget.max_candidates)

    if incumbent is not None:
        rate = _verify_rows(incumbent, full_rows, limits, full_total, full_total)
        if rate is not None and rate >= 1.0:
            return InductionResult(
                incumbent, 1.0, program_size(incumbent), arity, 0, "incumbent"
            )

    subset_rows = full_rows[: budget.example_cap]
    envs = [env for env, _, _ in subset_rows]

    example_map = {}
    ambiguous = set()
    for env, res, _ in full_rows:
        if env in example_map and example_map[env] != res:
            ambiguous.add(env)
        else:
            example_map.setdefault(env, res)
    for env in ambiguous:
        del example_map[env]

    literals = harvest_literals(merged)
    int_only = all(
        type(res) is IntV and all(type(a) is IntV for a in env)
        for env, res, _ in subset_rows
    )

    deadline = (
        time.monotonic() + budget.time_limit if budget.time_limit is not None else None
    )
    search = _Search(subset_rows, budget, counter, deadline)

    def pool_at(cap):
        return build_value_pool(
            envs,
            arity,
            literals,
            library,
            cap,
            counter,
            limits,
            pool_cap=budget.pool_cap,
            int_only=int_only,
        )

    try:
        stage_one = pool_at(min(_STAGE_ONE_CAP, budget.max_term_size))
        perfect = search.plain_phase(stage_one, arity)
        go_deep = not (perfect is not None and perfect <= arity + _STAGE_ONE_CAP)
        if go_deep and budget.max_term_size > 0:
            search.cands = []
            search.gen = 0
            pool = pool_at(budget.max_term_size)
            search.plain_phase(pool, arity)
            bools = build_bool_pool(pool, budget.cond_size, counter)
            search.guarded_phase(pool, bools, arity)
            if arity > 0:
                rec = build_rec_pool(
                    arity,
                    pool,
                    example_map,
                    budget,
                    counter,
                    library,
                    limits,
                    int_only=int_only,
                )
                search.recursive_phase(pool, bools, rec, arity, limits)
    except _Deadline:
        pass

    chosen, full_rate = _select(search.cands, full_rows, limits, budget.tolerance)
    if chosen is None:
        best = max(search.cands, key=lambda c: (c.rate, -c.size), default=None)
        raise NoCandidateFound(
            "no candidate reached %.3f over %d examples"
            % (1.0 - budget.tolerance, len(full_rows)),
            best_program=best.program if best else None,
            best_rate=best.rate if best else 0.0,
            candidates=counter.n,
        )
    return InductionResult(
        chosen.program, full_rate, chosen.size, arity, counter.n, chosen.phase
    )


@dataclass(frozen=True)
class FitRow:
    symbol: str
    round: int
    status: str
    hit_rate: float
    size: int
    phase: str
    examples: int


def fit_table(stores, budget=None, names=None, incumbents=None):
    """Fit one program per symbol from its evidence store.

    Symbols are visited in id order, repeatedly, until a full round
    changes nothing; each search sees the latest accepted programs of
    the other symbols as its library, so a program learned earlier in
    a round is available later in the same round.  A symbol keeps its
    old program unless the new one scores strictly better (or equal
    with fewer nodes).
    """
    budget = budget or SearchBudget()
    table = {k: v for k, v in (incumbents or {}).items() if v is not None}
    rows = []
    for rnd in range(budget.max_rounds):
        changed = False
        for sid in sorted(stores):
            exs = stores[sid]
            name = names[sid] if names is not None else str(sid)
            if not exs:
                continue
            library = tuple(
                Comb(names[other] if names is not None else str(other), table[other])
                for other in sorted(table)
                if other != sid and lambda_arity(table[other]) >= 1
            )
            old = table.get(sid)
            try:
                res = induce(exs, budget, library=library, incumbent=old)
            except NoCandidateFound as e:
                rows.append(
                    FitRow(name, rnd, "failed", e.best_rate, 0, "none", len(exs))
                )
                continue
            if res.phase == "incumbent":
                rows.append(
                    FitRow(name, rnd, "incumbent", 1.0, res.size, "incumbent", len(exs))
                )
                continue
            take = True
            if old is not None:
                old_rate = score_program(
                    old, exs, limits=budget.search_limits, arity=res.arity
                )
                old_size = program_size(old)
                take = res.hit_rate > old_rate + 1e-12 or (
                    abs(res.hit_rate - old_rate) <= 1e-12 and res.size < old_size
                )
            if take:
                replaced = old is not None and format_term(old) != format_term(res.program)
                fresh = old is None
                table[sid] = res.program
                changed = changed or fresh or replaced
                rows.append(
                    FitRow(
                        name,
                        rnd,
                        "new" if fresh else ("replaced" if replaced else "kept"),
                        res.hit_rate,
                        res.size,
                        res.phase,
                        len(exs),
                    )
                )
            else:
                rows.append(
                    FitRow(name, rnd, "kept", res.hit_rate, res.size, res.phase, len(exs))
                )
        if not changed:
            break
    return table, rows
