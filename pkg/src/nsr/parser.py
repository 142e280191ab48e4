"""Arc-standard dependency parsing with a feed-forward transition
classifier.

Nodes are token positions; the artificial root is ROOT (-1) and sits at
the bottom of the stack.  A parse of n tokens always takes exactly 2n
transitions: n shifts and n arc attachments.  Ties in the classifier
scores resolve LeftArc before RightArc before Shift.
"""

from __future__ import annotations

import numpy as np

from .nnet import Adam, Embedding, TwoLayerNet, softmax

ROOT = -1

LEFT_ARC = 0
RIGHT_ARC = 1
SHIFT = 2
TRANSITION_NAMES = ("LeftArc", "RightArc", "Shift")

N_FEATURES = 18


class IllegalTransition(Exception):
    pass


class NonProjectiveError(Exception):
    pass


class ParserState:
    """Stack (bottom to top), buffer, and the arc set built so far."""

    __slots__ = ("stack", "buffer", "arcs")

    def __init__(self, stack, buffer, arcs):
        self.stack = stack
        self.buffer = buffer
        self.arcs = arcs

    @classmethod
    def initial(cls, n):
        return cls((ROOT,), tuple(range(n)), frozenset())

    def is_terminal(self):
        return not self.buffer and self.stack == (ROOT,)

    def apply(self, t):
        if t not in legal_transitions(self):
            raise IllegalTransition(TRANSITION_NAMES[t])
        if t == SHIFT:
            return ParserState(
                self.stack + (self.buffer[0],), self.buffer[1:], self.arcs
            )
        top, second = self.stack[-1], self.stack[-2]
        if t == LEFT_ARC:
            # top takes second as dependent; second leaves the stack
            return ParserState(
                self.stack[:-2] + (top,), self.buffer, self.arcs | {(top, second)}
            )
        return ParserState(
            self.stack[:-1], self.buffer, self.arcs | {(second, top)}
        )


def legal_transitions(state):
    """The transitions whose preconditions hold.

    The root may never become a dependent, and it accepts its single
    dependent only once the buffer is exhausted, which forces exactly
    one tree under ROOT.
    """
    out = []
    if len(state.stack) >= 2:
        if state.stack[-2] != ROOT:
            out.append(LEFT_ARC)
            out.append(RIGHT_ARC)
        elif not state.buffer:
            out.append(RIGHT_ARC)
    if state.buffer:
        out.append(SHIFT)
    return tuple(out)


def _child_slots(node, arcs):
    """Dependents of node by position: leftmost two and rightmost two."""
    deps = sorted(d for h, d in arcs if h == node)
    left1 = deps[0] if deps else None
    left2 = deps[1] if len(deps) >= 2 else None
    right1 = deps[-1] if deps else None
    right2 = deps[-2] if len(deps) >= 2 else None
    return left1, left2, right1, right2


def feature_ids(state, symbols, null_id):
    """The 18-slot window: three stack tops, three buffer fronts, the
    two leftmost and two rightmost children of the top two stack items,
    and the grandchild corners (leftmost of leftmost, rightmost of
    rightmost) of those same two items."""
    slots = []
    for i in (1, 2, 3):
        slots.append(state.stack[-i] if len(state.stack) >= i else None)
    for i in (0, 1, 2):
        slots.append(state.buffer[i] if len(state.buffer) > i else None)
    for i in (1, 2):
        node = state.stack[-i] if len(state.stack) >= i else None
        if node is None:
            slots.extend((None, None, None, None))
            continue
        left1, left2, right1, right2 = _child_slots(node, state.arcs)
        slots.extend((left1, left2, right1, right2))
    for i in (1, 2):
        node = state.stack[-i] if len(state.stack) >= i else None
        ll = rr = None
        if node is not None:
            left1, _, right1, _ = _child_slots(node, state.arcs)
            if left1 is not None:
                ll = _child_slots(left1, state.arcs)[0]
            if right1 is not None:
                rr = _child_slots(right1, state.arcs)[2]
        slots.extend((ll, rr))
    ids = np.empty(N_FEATURES, dtype=np.int64)
    for j, s in enumerate(slots):
        # ROOT carries no symbol; it reads as an absent slot
        ids[j] = null_id if s is None or s == ROOT else symbols[s]
    return ids


class TransitionClassifier:
    """Embeddings for |vocab|+1 tokens (the extra row is the absent
    slot) into a tanh hidden layer and three transition scores."""

    def __init__(self, vocab_size, seed=0, dim=50, hidden=200, dropout=0.5):
        self.vocab_size = vocab_size
        self.dim = dim
        self.hidden = hidden
        self.dropout = dropout
        rng = np.random.default_rng(seed)
        self.embedding = Embedding(vocab_size + 1, dim, rng)
        self.net = TwoLayerNet(N_FEATURES * dim, hidden, 3, rng)

    @property
    def null_id(self):
        return self.vocab_size

    def logits(self, ids):
        x = self.embedding.gather(ids).reshape(ids.shape[0], -1)
        out, _ = self.net.logits(x)
        return out

    def probs(self, ids):
        return softmax(self.logits(ids))

    def loss_and_grads(self, ids, labels, dropout=0.0, rng=None):
        x = self.embedding.gather(ids).reshape(ids.shape[0], -1)
        loss, grads, dx = self.net.loss_and_grads(x, labels, dropout, rng)
        dvecs = dx.reshape(ids.shape[0], N_FEATURES, self.dim)
        grads["E"] = self.embedding.grad_from(ids, dvecs)
        return loss, grads

    def parameters(self):
        out = dict(self.net.params)
        out["E"] = self.embedding.table
        return out


def greedy_parse(symbols, clf, trace=None):
    """Masked-argmax decoding to the terminal state; returns the arcs.

    `trace`, when given a list, receives the transition sequence.
    """
    state = ParserState.initial(len(symbols))
    while not state.is_terminal():
        legal = legal_transitions(state)
        ids = feature_ids(state, symbols, clf.null_id)
        scores = clf.logits(ids[None, :])[0]
        best = min(legal, key=lambda t: (-scores[t], t))
        if trace is not None:
            trace.append(best)
        state = state.apply(best)
    return state.arcs


def is_projective(n, arcs):
    """True when no two arcs cross; the root arc spans (-1, dep)."""
    spans = [(min(h, d), max(h, d)) for h, d in arcs]
    for i, (a1, b1) in enumerate(spans):
        for a2, b2 in spans[i + 1 :]:
            if a1 < a2 < b1 < b2 or a2 < a1 < b2 < b1:
                return False
    return True


def oracle_transitions(symbols, gold_arcs):
    """Static oracle: the transition sequence whose replay rebuilds
    gold_arcs, attaching a node only after its own dependents are in.
    """
    n = len(symbols)
    heads = {}
    for h, d in gold_arcs:
        if d in heads:
            raise NonProjectiveError("node %d has two heads" % d)
        heads[d] = h
    if set(heads) != set(range(n)):
        raise NonProjectiveError("arcs do not cover the sentence")
    wanted = {}
    for h, d in gold_arcs:
        wanted.setdefault(h, set()).add(d)

    out = []
    state = ParserState.initial(n)
    while not state.is_terminal():
        move = None
        if len(state.stack) >= 2:
            top, second = state.stack[-1], state.stack[-2]
            have = {d for h, d in state.arcs if h == second}
            if (
                second != ROOT
                and heads.get(second) == top
                and wanted.get(second, set()) <= have
            ):
                move = LEFT_ARC
            else:
                have_top = {d for h, d in state.arcs if h == top}
                if heads.get(top) == second and wanted.get(top, set()) <= have_top:
                    move = RIGHT_ARC
        if move is None and state.buffer:
            move = SHIFT
        if move is None or move not in legal_transitions(state):
            raise NonProjectiveError("no applicable transition")
        out.append(move)
        state = state.apply(move)
    if state.arcs != frozenset(gold_arcs):
        raise NonProjectiveError("replay does not reproduce the tree")
    return out


def train_parser(pairs, clf, lr=1e-4, batch_size=64, epochs=1, seed=0):
    """Minibatch cross-entropy over (feature-ids, transition) pairs."""
    if not pairs:
        return clf
    rng = np.random.default_rng(seed)
    ids = np.stack([p[0] for p in pairs])
    labels = np.array([p[1] for p in pairs], dtype=np.int64)
    opt = Adam(clf.parameters(), lr=lr)
    for _ in range(epochs):
        order = rng.permutation(len(pairs))
        for lo in range(0, len(pairs), batch_size):
            take = order[lo : lo + batch_size]
            loss, grads = clf.loss_and_grads(
                ids[take], labels[take], dropout=clf.dropout, rng=rng
            )
            opt.step(grads)
    return clf
