"""Node values.

Every node in a grounded symbol tree carries a value from a small tagged
union: a non-negative arbitrary-precision integer, a single output token,
a list of values, or Nothing.  Nothing doubles as the failure sentinel and
the "no semantic contribution" marker (used by bracket-like symbols).
"""

from __future__ import annotations

from dataclasses import dataclass


class _NothingType:
    """Singleton empty value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Nothing"

    def __reduce__(self):
        return (_NothingType, ())


NOTHING = _NothingType()


@dataclass(frozen=True, slots=True)
class IntV:
    """Non-negative integer value."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 0:
            raise ValueError("IntV holds a non-negative integer, got %r" % (self.n,))

    def __repr__(self):
        return "IntV(%d)" % self.n


@dataclass(frozen=True, slots=True)
class TokenV:
    """Single output-alphabet token."""

    tok: str

    def __post_init__(self):
        if not _valid_token(self.tok):
            raise ValueError("bad token %r" % (self.tok,))

    def __repr__(self):
        return "TokenV(%s)" % self.tok


@dataclass(frozen=True, slots=True)
class ListV:
    """Ordered list of values."""

    items: tuple

    def __post_init__(self):
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))
        for it in self.items:
            if not is_value(it):
                raise ValueError("ListV element %r is not a value" % (it,))

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return "ListV(%s)" % (",".join(format_value(i) for i in self.items))


Value = object  # IntV | TokenV | ListV | NOTHING; alias for annotations

_RESERVED = {"nothing"}
_DELIMS = set("[],\t\n ")


def _valid_token(tok) -> bool:
    if not isinstance(tok, str) or not tok:
        return False
    if tok in _RESERVED:
        return False
    if any(c in _DELIMS for c in tok):
        return False
    if tok.isdigit():
        return False
    return True


def is_value(v) -> bool:
    return v is NOTHING or isinstance(v, (IntV, TokenV, ListV))


def token_list(tokens) -> ListV:
    """Build a ListV of TokenV from an iterable of token strings."""
    return ListV(tuple(TokenV(t) for t in tokens))


def format_value(v) -> str:
    """Compact single-token rendering, parseable by :func:`parse_value`."""
    if v is NOTHING:
        return "nothing"
    if isinstance(v, IntV):
        return str(v.n)
    if isinstance(v, TokenV):
        return v.tok
    if isinstance(v, ListV):
        return "[" + ",".join(format_value(i) for i in v.items) + "]"
    raise TypeError("not a value: %r" % (v,))


class ValueSyntaxError(ValueError):
    pass


def parse_value(text: str):
    """Inverse of :func:`format_value`."""
    text = text.strip()
    v, rest = _parse(text)
    if rest:
        raise ValueSyntaxError("trailing junk after value: %r" % rest)
    return v


def _parse(text: str):
    if not text:
        raise ValueSyntaxError("empty value literal")
    if text.startswith("["):
        items = []
        rest = text[1:]
        if rest.startswith("]"):
            return ListV(()), rest[1:]
        while True:
            item, rest = _parse(rest)
            items.append(item)
            if rest.startswith(","):
                rest = rest[1:]
            elif rest.startswith("]"):
                return ListV(tuple(items)), rest[1:]
            else:
                raise ValueSyntaxError("unterminated list in %r" % text)
    # scan an atom up to a delimiter
    i = 0
    while i < len(text) and text[i] not in "[],":
        i += 1
    atom, rest = text[:i], text[i:]
    if not atom:
        raise ValueSyntaxError("missing atom in %r" % text)
    if atom == "nothing":
        return NOTHING, rest
    if atom.isdigit():
        return IntV(int(atom)), rest
    return TokenV(atom), rest
