"""String-edit compositions over a small letter alphabet.

Sentences apply ten edit functions (six unary, four binary) to letter
sequences in prefix notation, with a comma separating the two arguments
of a binary function: "reverse a b c" -> c b a, "append a b , c" ->
a b c.  The notation parses uniquely, so every sentence has exactly one
target.  Splits exercise recombination (systematicity holds out two
function compositions) and longer-than-trained composition chains
(productivity trains on at most 8 functions and tests on at least 9).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..values import ListV, TokenV
from .common import ConfigError, Sample, canonical_split

UNARY = ("copy", "reverse", "shift", "echo", "swap_first_last", "repeat")
BINARY = ("append", "prepend", "remove_first", "remove_second")
FUNCTIONS = UNARY + BINARY
LETTERS = ("a", "b", "c", "d", "e", "f", "g", "h")
SEPARATOR = ","

# compositions (outer, inner) absent from systematicity training data
HELD_OUT_PAIRS = (("repeat", "reverse"), ("swap_first_last", "echo"))


@dataclass(frozen=True)
class PcfgConfig:
    seed: int = 0
    n_train: int = 1000
    n_test: int = 200
    max_functions: int = 5  # sampling depth for iid and systematicity
    train_functions: int = 8  # productivity boundary: train is at most this
    min_test_functions: int = 9  # productivity: test is at least this
    max_test_functions: int = 10
    max_letters: int = 4  # letters per leaf sequence

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("need at least one sample per side")
        if self.max_functions < 1 or self.max_letters < 1:
            raise ConfigError("degenerate sampling bounds")
        if not self.train_functions < self.min_test_functions <= self.max_test_functions:
            raise ConfigError("productivity boundary out of order")


def apply_function(name: str, args):
    """One edit step on already-evaluated letter tuples."""
    if name in UNARY:
        (x,) = args
        if name == "copy":
            return x
        if name == "reverse":
            return x[::-1]
        if name == "shift":
            return x[1:] + x[:1]
        if name == "echo":
            return x + x[-1:]
        if name == "swap_first_last":
            return x[-1:] + x[1:-1] + x[:1] if len(x) > 1 else x
        return x + x  # repeat
    a, b = args
    if name == "append":
        return a + b
    if name == "prepend":
        return b + a
    if name == "remove_first":
        return b
    if name == "remove_second":
        return a
    raise ConfigError("unknown function %r" % name)


def interpret_tree(node) -> tuple[str, ...]:
    """Evaluate an expression tree down to its letter tuple."""
    if node[0] == "seq":
        return tuple(node[1])
    name = node[0]
    args = [interpret_tree(child) for child in node[1:]]
    return apply_function(name, args)


def to_words(node) -> tuple[str, ...]:
    """Render an expression tree as its sentence."""
    if node[0] == "seq":
        return tuple(node[1])
    name = node[0]
    if name in UNARY:
        return (name,) + to_words(node[1])
    return (name,) + to_words(node[1]) + (SEPARATOR,) + to_words(node[2])


def function_count(node) -> int:
    if node[0] == "seq":
        return 0
    return 1 + sum(function_count(child) for child in node[1:])


def contains_composition(node, outer: str, inner: str) -> bool:
    """True when a node named ``outer`` directly dominates one named ``inner``."""
    if node[0] == "seq":
        return False
    if node[0] == outer and any(child[0] == inner for child in node[1:]):
        return True
    return any(contains_composition(child, outer, inner) for child in node[1:])


def _contains_held_out(node) -> bool:
    return any(contains_composition(node, f, g) for f, g in HELD_OUT_PAIRS)


def _leaf(rng, config):
    length = rng.randint(1, config.max_letters)
    return ("seq", tuple(rng.choice(LETTERS) for _ in range(length)))


def _tree(rng, config, k):
    if k == 0:
        return _leaf(rng, config)
    name = rng.choice(FUNCTIONS)
    if name in UNARY:
        return (name, _tree(rng, config, k - 1))
    left = rng.randint(0, k - 1)
    return (name, _tree(rng, config, left), _tree(rng, config, k - 1 - left))


def _held_out_tree(rng, config, k):
    """A tree containing one held-out composition, k functions in total."""
    outer, inner = HELD_OUT_PAIRS[rng.randrange(len(HELD_OUT_PAIRS))]
    node = (outer, (inner, _tree(rng, config, max(0, k - 2))))
    while rng.random() < 0.3:
        node = (rng.choice(UNARY), node)
    return node


def generate_pcfg_lite(split="iid", config: PcfgConfig | None = None):
    """Build (train, test) sample lists for one split protocol."""
    split = canonical_split("pcfg_lite", split)
    config = config or PcfgConfig()
    rng = random.Random(config.seed)

    def draw(tag):
        if split == "productivity":
            if tag == "train":
                k = rng.randint(1, config.train_functions)
            else:
                k = rng.randint(config.min_test_functions, config.max_test_functions)
            return _tree(rng, config, k)
        k = rng.randint(1, config.max_functions)
        if split == "systematicity" and tag == "test":
            return _held_out_tree(rng, config, k)
        return _tree(rng, config, k)

    def admissible(tree, tag):
        if split == "systematicity":
            held = _contains_held_out(tree)
            return held if tag == "test" else not held
        return True

    seen: set[tuple[str, ...]] = set()

    def collect(tag, count):
        out = []
        attempts = 0
        while len(out) < count:
            attempts += 1
            if attempts > 200 * count + 1000:
                raise ConfigError("sampling stalled for %s/%s" % (split, tag))
            tree = draw(tag)
            if not admissible(tree, tag):
                continue
            words = to_words(tree)
            if words in seen:
                continue
            seen.add(words)
            target = ListV(tuple(TokenV(tok) for tok in interpret_tree(tree)))
            out.append(Sample(words, target, tag))
        return out

    train = collect("train", config.n_train)
    test = collect("test", config.n_test)
    return train, test
