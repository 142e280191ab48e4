"""SCAN navigation commands paired with canonical action sequences.

The corpus is the usual command grammar: a primitive action (walk, look,
run, jump, turn) optionally specialized by a direction (left, right),
widened to opposite or around, repeated twice or thrice, and two such
phrases joined by "and" or "after".  Targets expand each command into
action tokens, e.g. "jump twice" -> JUMP JUMP and "walk opposite left"
-> LTURN LTURN WALK.
"""

from __future__ import annotations

import random

from ..values import ListV, TokenV
from .common import ConfigError, Sample, canonical_split

PRIMITIVES = ("walk", "look", "run", "jump")
ACTION = {"walk": "WALK", "look": "LOOK", "run": "RUN", "jump": "JUMP"}
TURN = {"left": "LTURN", "right": "RTURN"}
ACTIONS = ("WALK", "LOOK", "RUN", "JUMP", "LTURN", "RTURN")

WORDS = PRIMITIVES + (
    "turn",
    "left",
    "right",
    "opposite",
    "around",
    "twice",
    "thrice",
    "and",
    "after",
)

MAX_TRAIN_ACTIONS = 22  # length split boundary; test targets span 24..48


def interpret(words) -> tuple[str, ...]:
    """Expand one command into its action tokens."""
    words = tuple(words)
    if not words:
        raise ConfigError("empty command")
    for connector in ("and", "after"):
        if connector in words:
            i = words.index(connector)
            first = interpret(words[:i])
            second = interpret(words[i + 1 :])
            return first + second if connector == "and" else second + first
    if words[-1] == "twice":
        return interpret(words[:-1]) * 2
    if words[-1] == "thrice":
        return interpret(words[:-1]) * 3
    head = words[0]
    if head not in ACTION and head != "turn":
        raise ConfigError("not a command: %s" % " ".join(words))
    base = () if head == "turn" else (ACTION[head],)
    if len(words) == 1:
        if head == "turn":
            raise ConfigError("bare turn has no direction")
        return base
    if words[-1] not in TURN:
        raise ConfigError("not a command: %s" % " ".join(words))
    turn = (TURN[words[-1]],)
    if len(words) == 2:
        return turn + base
    if len(words) == 3 and words[1] == "opposite":
        return turn + turn + base
    if len(words) == 3 and words[1] == "around":
        return (turn + base) * 4
    raise ConfigError("not a command: %s" % " ".join(words))


def all_commands() -> list[tuple[str, ...]]:
    """Every command the grammar generates, in a fixed order (20,910)."""
    heads = PRIMITIVES + ("turn",)
    verbs = [(u,) for u in PRIMITIVES]
    for head in heads:
        for direction in ("left", "right"):
            verbs.append((head, direction))
    for modifier in ("opposite", "around"):
        for head in heads:
            for direction in ("left", "right"):
                verbs.append((head, modifier, direction))
    phrases = list(verbs)
    for repeat in ("twice", "thrice"):
        phrases.extend(verb + (repeat,) for verb in verbs)
    commands = list(phrases)
    for connector in ("and", "after"):
        for first in phrases:
            for second in phrases:
                commands.append(first + (connector,) + second)
    return commands


def _contains_around_right(words) -> bool:
    return any(
        words[i] == "around" and words[i + 1] == "right" for i in range(len(words) - 1)
    )


def generate_scan(split="simple", seed: int = 0):
    """Build (train, test) for one of the four published split protocols.

    simple: seeded random 80/20 division of all commands.
    jump: train keeps the bare "jump" command plus every jump-free
        command; test is every command mixing jump with anything else.
    around_right: commands containing the "around right" bigram are all
        held out for test.
    length: train targets have at most 22 actions; test targets land in
        24..48 (no command expands to exactly 23 actions).
    """
    split = canonical_split("scan", split)
    commands = all_commands()
    if split == "simple":
        rng = random.Random(seed)
        order = list(commands)
        rng.shuffle(order)
        cut = (len(order) * 4) // 5
        train, test = order[:cut], order[cut:]
    elif split == "jump":
        train = [c for c in commands if "jump" not in c or c == ("jump",)]
        test = [c for c in commands if "jump" in c and c != ("jump",)]
    elif split == "around_right":
        train = [c for c in commands if not _contains_around_right(c)]
        test = [c for c in commands if _contains_around_right(c)]
    else:
        train = [c for c in commands if len(interpret(c)) <= MAX_TRAIN_ACTIONS]
        test = [c for c in commands if len(interpret(c)) > MAX_TRAIN_ACTIONS]

    def build(chosen, tag):
        return [
            Sample(c, ListV(tuple(TokenV(a) for a in interpret(c))), tag)
            for c in chosen
        ]

    return build(train, "train"), build(test, "test")
