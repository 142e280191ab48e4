"""Integer arithmetic expressions with the four operators and parentheses.

Expressions mix digits 0-9 with + - * / and parenthesized groups, and
every target is the exact integer result: "2 + 3 * 9" -> 29.  Division
only appears where it is exact, and no subexpression ever goes negative,
so values stay inside the machine's nonnegative integers.  The test side
is organized by how far a sample steps outside the training regime in
length (token count) and value.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..values import IntV
from .common import ConfigError, Sample

OPERATORS = ("+", "-", "*", "/")
PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
SUBSETS = ("I", "SS", "LS", "SL", "LL")


@dataclass(frozen=True)
class HintConfig:
    seed: int = 0
    n_train: int = 2000
    n_test: int = 200  # per test subset
    max_train_len: int = 11  # token budget inside the training regime
    max_train_value: int = 100  # value budget inside the training regime
    max_test_len: int = 21
    max_test_value: int = 10_000
    extra_paren_rate: float = 0.15  # chance of a redundant parenthesis pair

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 0:
            raise ConfigError("need at least one training sample")
        if self.max_train_len < 1:
            raise ConfigError("training length budget admits no expression")
        if self.max_test_len <= self.max_train_len:
            raise ConfigError("no room for longer-than-trained expressions")
        if self.max_test_value <= self.max_train_value:
            raise ConfigError("no room for bigger-than-trained values")
        if self.max_train_value < 9:
            raise ConfigError("value budget excludes some digits")
        if not 0.0 <= self.extra_paren_rate < 1.0:
            raise ConfigError("parenthesis rate out of range")


def evaluate_tree(node) -> int:
    """Exact value of an expression tree."""
    if isinstance(node, int):
        return node
    if node[0] == "()":
        return evaluate_tree(node[1])
    op, left, right = node
    a, b = evaluate_tree(left), evaluate_tree(right)
    if op == "+":
        return a + b
    if op == "-":
        if a < b:
            raise ConfigError("negative intermediate")
        return a - b
    if op == "*":
        return a * b
    if b == 0 or a % b != 0:
        raise ConfigError("inexact division")
    return a // b


def _operator_of(node):
    while not isinstance(node, int) and node[0] == "()":
        node = node[1]
    return None if isinstance(node, int) else node[0]


def to_words(node) -> tuple[str, ...]:
    """Render a tree with the parentheses the usual precedence demands."""
    if isinstance(node, int):
        return (str(node),)
    if node[0] == "()":
        return ("(",) + to_words(node[1]) + (")",)
    op, left, right = node

    def wrap(child, right_side):
        words = to_words(child)
        child_op = _operator_of(child)
        if child_op is None:
            return words
        lower = PRECEDENCE[child_op] < PRECEDENCE[op]
        # left-associative rendering: a right operand at equal precedence
        # needs parentheses under - and / to keep the same value
        tie = (
            right_side
            and PRECEDENCE[child_op] == PRECEDENCE[op]
            and op in ("-", "/")
        )
        if (lower or tie) and words[0] != "(":
            return ("(",) + words + (")",)
        return words

    return wrap(left, False) + (op,) + wrap(right, True)


def _sample_tree(rng, config, ops, value_cap):
    """A random tree with ``ops`` operator nodes, every value in bounds."""
    if ops == 0:
        return rng.randint(0, 9)
    for _ in range(40):
        op = rng.choice(OPERATORS)
        split = rng.randint(0, ops - 1)
        left = _sample_tree(rng, config, split, value_cap)
        right = _sample_tree(rng, config, ops - 1 - split, value_cap)
        try:
            value = evaluate_tree((op, left, right))
        except ConfigError:
            continue
        if value > value_cap:
            continue
        node = (op, left, right)
        if rng.random() < config.extra_paren_rate:
            node = ("()", node)
        return node
    return rng.randint(0, 9)


def _classify(length, value, config):
    long = length > config.max_train_len
    big = value > config.max_train_value
    if long and big:
        return "LL"
    if long:
        return "LS"
    if big:
        return "SL"
    return "SS"


def generate_hint_sym(config: HintConfig | None = None):
    """Build (train, subsets) where subsets maps I/SS/LS/SL/LL to samples.

    Train stays inside both budgets.  I repeats training expressions (the
    subset exists so a glyph pipeline can re-render them with fresh
    noise; symbolically the inputs recur verbatim).  SS holds new
    expressions inside both budgets, LS exceeds only the length budget,
    SL only the value budget, LL both.
    """
    config = config or HintConfig()
    rng = random.Random(config.seed)
    seen: set[tuple[str, ...]] = set()

    def collect(count, want, cap_len, tag):
        out = []
        attempts = 0
        while len(out) < count:
            attempts += 1
            if attempts > 3000 * count + 10_000:
                raise ConfigError("sampling stalled for subset %s" % tag)
            budget = rng.randint(0, max(1, cap_len // 3))
            tree = _sample_tree(rng, config, budget, config.max_test_value)
            words = to_words(tree)
            if len(words) > config.max_test_len or words in seen:
                continue
            value = evaluate_tree(tree)
            if _classify(len(words), value, config) != want:
                continue
            seen.add(words)
            out.append(Sample(words, IntV(value), tag))
        return out

    train = collect(config.n_train, "SS", config.max_train_len, "train")

    subsets: dict[str, list[Sample]] = {}
    pick = random.Random(config.seed + 1)
    chosen = pick.sample(train, min(config.n_test, len(train)))
    subsets["I"] = [Sample(s.input, s.target, "I") for s in chosen]
    subsets["SS"] = collect(config.n_test, "SS", config.max_train_len, "SS")
    subsets["LS"] = collect(config.n_test, "LS", config.max_test_len, "LS")
    subsets["SL"] = collect(config.n_test, "SL", config.max_train_len, "SL")
    subsets["LL"] = collect(config.n_test, "LL", config.max_test_len, "LL")
    return train, subsets
