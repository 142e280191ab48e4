"""Grounded symbol trees.

A parse of an input is a single-rooted directed tree whose nodes are
(input span, symbol, value) triplets; node i covers token i, so node ids
double as surface positions and children are ordered by position.  Trees
are immutable after construction: structure edits (rotation) return new
trees with stale values cleared.
"""

from __future__ import annotations

from .values import NOTHING, format_value, parse_value


class TreeStructureError(ValueError):
    pass


class CycleError(TreeStructureError):
    pass


class MultiParentError(TreeStructureError):
    pass


class DisconnectedError(TreeStructureError):
    pass


class ArcNotFound(ValueError):
    pass


class Vocabulary:
    """Bidirectional symbol-name/index map."""

    def __init__(self, names):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate symbol names")
        self.index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def id_of(self, name: str) -> int:
        return self.index[name]

    def name_of(self, sym: int) -> str:
        return self.names[sym]

    def encode(self, tokens):
        return [self.index[t] for t in tokens]

    def decode(self, ids):
        return [self.names[i] for i in ids]


class GssTree:
    """Immutable arena-backed tree over n nodes.

    parents[i] is the head of node i, or -1 for the root.  `source`
    optionally carries the raw input the symbols were perceived from
    (a token tuple, or a glyph feature matrix).
    """

    __slots__ = ("symbols", "parents", "values", "source", "_children")

    def __init__(self, symbols, parents, values=None, source=None):
        self.symbols = tuple(symbols)
        self.parents = tuple(parents)
        n = len(self.symbols)
        if len(self.parents) != n:
            raise TreeStructureError("parents length mismatch")
        if values is None:
            values = (NOTHING,) * n
        self.values = tuple(values)
        if len(self.values) != n:
            raise TreeStructureError("values length mismatch")
        self.source = source
        kids = [[] for _ in range(n)]
        roots = []
        for i, p in enumerate(self.parents):
            if p == -1:
                roots.append(i)
            elif 0 <= p < n:
                kids[p].append(i)
            else:
                raise TreeStructureError("parent %d out of range" % p)
        if len(roots) != 1:
            raise DisconnectedError("tree needs exactly one root, got %d" % len(roots))
        self._children = tuple(tuple(k) for k in kids)
        # reachability from the root rules out cycles among non-root nodes
        seen = 0
        stack = [roots[0]]
        while stack:
            x = stack.pop()
            seen += 1
            stack.extend(self._children[x])
        if seen != n:
            raise CycleError("%d of %d nodes unreachable from root" % (n - seen, n))

    @property
    def n(self) -> int:
        return len(self.symbols)

    @property
    def root(self) -> int:
        return self.parents.index(-1)

    def children(self, i: int):
        return self._children[i]

    def arcs(self):
        """(head, dependent) pairs, dependent-ordered."""
        return tuple(
            (p, i) for i, p in enumerate(self.parents) if p != -1
        )

    def postorder(self):
        """Children-before-parent node order."""
        out = []
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
            else:
                stack.append((node, True))
                for c in reversed(self._children[node]):
                    stack.append((c, False))
        return out

    def ancestors(self, i: int):
        out = []
        p = self.parents[i]
        while p != -1:
            out.append(p)
            p = self.parents[p]
        return out

    @property
    def root_value(self):
        return self.values[self.root]

    def with_values(self, values):
        return GssTree(self.symbols, self.parents, tuple(values), self.source)

    def with_symbol(self, i: int, sym: int):
        symbols = list(self.symbols)
        symbols[i] = sym
        values = list(self.values)
        values[i] = NOTHING
        for a in self.ancestors(i):
            values[a] = NOTHING
        return GssTree(symbols, self.parents, values, self.source)

    def structure_key(self):
        return (self.symbols, self.parents)

    def __eq__(self, other):
        return (
            isinstance(other, GssTree)
            and self.symbols == other.symbols
            and self.parents == other.parents
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.symbols, self.parents, self.values))

    def __repr__(self):
        return "GssTree(n=%d, root=%d)" % (self.n, self.root)


def new_tree(symbols, arcs, source=None) -> GssTree:
    """Build a tree from explicit (head, dependent) arcs.

    Raises MultiParentError, CycleError, or DisconnectedError when the
    arc set is not a single-rooted tree over all nodes.
    """
    n = len(symbols)
    parents = [-1] * n
    assigned = [False] * n
    for head, dep in arcs:
        if not (0 <= head < n and 0 <= dep < n):
            raise TreeStructureError("arc (%d,%d) out of range" % (head, dep))
        if assigned[dep]:
            raise MultiParentError("node %d has two heads" % dep)
        assigned[dep] = True
        parents[dep] = head
    roots = [i for i in range(n) if parents[i] == -1]
    if n and not roots:
        raise CycleError("no root: every node has a head")
    if len(roots) > 1:
        raise DisconnectedError(
            "nodes %s all lack heads" % (roots,)
        )
    return GssTree(symbols, parents, source=source)


def rotate(tree: GssTree, arc) -> GssTree:
    """Swap head and dependent roles on one arc.

    The dependent adopts the head's former parent; the head becomes the
    dependent's child; every other node keeps its head.  Values on the
    two rotated nodes and all their new ancestors are reset to Nothing
    pending re-evaluation.  Applying the mirrored rotation restores the
    original structure.
    """
    head, dep = arc
    if not (0 <= dep < tree.n) or tree.parents[dep] != head or head == -1:
        raise ArcNotFound("no arc (%r,%r)" % (head, dep))
    parents = list(tree.parents)
    parents[dep] = parents[head]
    parents[head] = dep
    out = GssTree(tree.symbols, parents, tree.values, tree.source)
    values = list(out.values)
    values[head] = NOTHING
    values[dep] = NOTHING
    for a in out.ancestors(dep):
        values[a] = NOTHING
    return out.with_values(values)


def format_tree(tree: GssTree, vocab: Vocabulary | None = None) -> str:
    """Debug rendering: one node per line, idx TAB symbol TAB parent TAB value."""
    lines = []
    for i in range(tree.n):
        sym = tree.symbols[i]
        name = vocab.name_of(sym) if vocab is not None else str(sym)
        lines.append(
            "%d\t%s\t%d\t%s" % (i, name, tree.parents[i], format_value(tree.values[i]))
        )
    return "\n".join(lines)


def parse_tree(text: str, vocab: Vocabulary | None = None) -> GssTree:
    """Inverse of :func:`format_tree`."""
    symbols, parents, values = [], [], []
    for line in text.strip().splitlines():
        idx, name, parent, value = line.rstrip("\n").split("\t")
        if int(idx) != len(symbols):
            raise TreeStructureError("node lines out of order")
        symbols.append(vocab.id_of(name) if vocab is not None else int(name))
        parents.append(int(parent))
        values.append(parse_value(value))
    return GssTree(symbols, parents, values)


def enumerate_parent_vectors(n: int):
    """Yield every single-rooted tree structure on n nodes as a parent vector.

    Exhaustive and tiny-n only; used by oracle-style checks.
    """
    if n == 0:
        return
    choices = [[-1] + [h for h in range(n)] for _ in range(n)]

    def rec(i, parents):
        if i == n:
            if parents.count(-1) != 1:
                return
            try:
                GssTree([0] * n, parents)
            except TreeStructureError:
                return
            yield tuple(parents)
            return
        for h in choices[i]:
            if h == i:
                continue
            parents.append(h)
            yield from rec(i + 1, parents)
            parents.pop()

    yield from rec(0, [])
