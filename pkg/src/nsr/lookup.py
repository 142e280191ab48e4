"""Memorizing machine built from four primitives.

Any finite set of (input, result) pairs can be replayed exactly by a
machine whose program table contains nothing but `0`, `inc`, `==`, and
`if`: an indexing map sends each known input to a numeral spelled as an
inc-chain, and a nested conditional compares that numeral against each
index in turn, returning the recorded result on a hit and the absent
value once every comparison misses.  Unseen inputs are routed to a
sentinel index one past the last, so they fall through to the final
miss branch.

The construction keeps the machine's shape: `parse` produces a two-node
structure (index under a lookup head), and `run` evaluates that
structure against the table like any other valued tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .interpreter import EvalLimits, evaluate_tree
from .programs import IF, EQ, inc_chain
from .terms import App, Lam, LitInt, LitList, LitTok, NOTHING_TERM, Var
from .tree import GssTree
from .values import IntV, ListV, TokenV, NOTHING

LOOKUP_LIMITS = EvalLimits(max_steps=1_000_000, max_recursion_depth=10_000)


class DuplicateInputConflict(Exception):
    """The same input appears twice with different results."""


def _literal(value):
    if value is NOTHING:
        return NOTHING_TERM
    if isinstance(value, IntV):
        return LitInt(value.n)
    if isinstance(value, TokenV):
        return LitTok(value.tok)
    if isinstance(value, ListV):
        if not all(isinstance(it, TokenV) for it in value.items):
            raise TypeError(
                "only token sequences embed as list literals, got %r" % (value,)
            )
        return LitList(tuple(it.tok for it in value.items))
    raise TypeError("cannot embed %r as a literal" % (value,))


@dataclass
class LookupNSR:
    """Index map plus the table that replays the memorized pairs."""

    index_map: dict
    table: dict
    lookup_symbol: int
    fallback_index: int
    limits: EvalLimits = field(default=LOOKUP_LIMITS)

    @property
    def program(self):
        return self.table[self.lookup_symbol]

    def parse(self, tokens):
        """The trivial structure: the input's index under the lookup head."""
        idx = self.index_map.get(tuple(tokens), self.fallback_index)
        return GssTree((idx, self.lookup_symbol), (1, -1))

    def run(self, tokens):
        valued = evaluate_tree(
            self.parse(tokens), self.table, self.limits, absorb_errors=True
        )
        return valued.root_value


def build_lookup_nsr(dataset) -> LookupNSR:
    """Memorize `dataset` (pairs of token tuple and result value).

    Conflicting duplicates raise DuplicateInputConflict; identical
    duplicates collapse onto one index.  The empty dataset produces the
    bare miss program, which answers every input with the absent value.
    """
    index_map = {}
    results = []
    for tokens, y in dataset:
        key = tuple(tokens)
        if key in index_map:
            if results[index_map[key]] != y:
                raise DuplicateInputConflict(
                    "input %r maps to %r and %r"
                    % (key, results[index_map[key]], y)
                )
            continue
        index_map[key] = len(results)
        results.append(y)

    body = NOTHING_TERM
    for i in range(len(results) - 1, -1, -1):
        hit = App(App(EQ, Var(0)), inc_chain(i))
        body = App(App(App(IF, hit), _literal(results[i])), body)

    n = len(results)
    table = {i: inc_chain(i) for i in range(n + 1)}
    table[n + 1] = Lam(body)
    return LookupNSR(
        index_map=index_map,
        table=table,
        lookup_symbol=n + 1,
        fallback_index=n,
    )
