"""Shared dataset plumbing: sample records, file round-trip, exact scoring."""

from __future__ import annotations

from dataclasses import dataclass

from ..values import IntV, ListV, TokenV, Value


class ConfigError(ValueError):
    """A dataset request that cannot be satisfied as stated."""


TASKS = ("scan", "pcfg_lite", "hint_sym")

SPLITS = {
    "scan": ("simple", "jump", "around_right", "length"),
    "pcfg_lite": ("iid", "systematicity", "productivity"),
    "hint_sym": ("default",),
}


def canonical_task(name: str) -> str:
    compact = str(name).strip().lower().replace("-", "_")
    if compact in TASKS:
        return compact
    raise ConfigError("unknown task %r (expected one of %s)" % (name, ", ".join(TASKS)))


def canonical_split(task: str, name: str) -> str:
    """Normalize a split name; case and word separators are ignored."""
    task = canonical_task(task)
    compact = str(name).strip().lower().replace("-", "").replace("_", "")
    for split in SPLITS[task]:
        if split.replace("_", "") == compact:
            return split
    raise ConfigError(
        "unknown split %r for task %s (expected one of %s)"
        % (name, task, ", ".join(SPLITS[task]))
    )


@dataclass(frozen=True)
class Sample:
    """One labelled instance: input token sequence, target value, split label.

    ``input`` holds plain word tokens; pipelines that render tokens into
    glyph vectors substitute an array here and keep the target unchanged.
    """

    input: tuple[str, ...]
    target: Value
    split_tag: str


@dataclass(frozen=True)
class SplitSpec:
    """A dataset request: which task, which split, how much, which seed."""

    task: str
    split: str
    seed: int = 0
    n_train: int | None = None
    n_test: int | None = None

    def __post_init__(self):
        task = canonical_task(self.task)
        object.__setattr__(self, "task", task)
        object.__setattr__(self, "split", canonical_split(task, self.split))
        for cap in (self.n_train, self.n_test):
            if cap is not None and cap < 0:
                raise ConfigError("negative size cap in %r" % (self,))


def format_target(value: Value) -> str:
    if type(value) is IntV:
        return str(value.n)
    if type(value) is ListV:
        return " ".join(item.tok for item in value.items)
    raise ConfigError("cannot serialize target %r" % (value,))


def parse_target(text: str, kind: str = "auto"):
    """Decode a target field; ``kind`` is "int", "tokens", or "auto"."""
    text = text.strip()
    if kind == "int" or (kind == "auto" and text.isdigit()):
        if not text.isdigit():
            raise ConfigError("expected an integer target, got %r" % text)
        return IntV(int(text))
    if kind not in ("tokens", "auto"):
        raise ConfigError("unknown target kind %r" % kind)
    if not text:
        return ListV(())
    return ListV(tuple(TokenV(tok) for tok in text.split(" ")))


def write_samples(path, samples) -> None:
    """One sample per line: split tag, input tokens, target, tab-separated."""
    with open(path, "w", encoding="utf-8") as handle:
        for sample in samples:
            tokens = " ".join(sample.input)
            handle.write(
                "%s\t%s\t%s\n" % (sample.split_tag, tokens, format_target(sample.target))
            )


def read_samples(path, kind: str = "auto") -> list[Sample]:
    samples = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ConfigError("malformed line %d in %s" % (line_no, path))
            tag, tokens, target = parts
            words = tuple(tokens.split(" ")) if tokens else ()
            samples.append(Sample(words, parse_target(target, kind), tag))
    return samples


def evaluate_exact(model, samples) -> float:
    """Fraction of samples whose predicted value equals the target exactly.

    ``model`` is either a callable on the input tokens or an object with a
    ``predict`` method.  Any mismatch, including a Nothing prediction,
    counts as wrong.
    """
    predict = model.predict if hasattr(model, "predict") else model
    if not samples:
        return 1.0
    hits = sum(1 for s in samples if predict(s.input) == s.target)
    return hits / len(samples)
