"""Symbol grounding over a synthetic glyph channel.

Each vocabulary symbol owns a prototype vector; rendering adds seeded
Gaussian noise, and nominated confusion pairs sit deliberately close so
that grounding stays ambiguous the way visually similar characters
are.  For symbol-input tasks the whole module is bypassed and tokens
ground to themselves.
"""

from __future__ import annotations

import struct

import numpy as np

from .nnet import Adam, TwoLayerNet, softmax

GLYPH_DIM = 16


class DimensionMismatch(Exception):
    pass


class GlyphChannel:
    """Prototype table with noise scale and confusion geometry."""

    def __init__(self, vocab_size, dim=GLYPH_DIM, sigma=0.25, seed=0,
                 confusion_pairs=(), confusion_gap=0.45):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.vocab_size = vocab_size
        self.dim = dim
        self.sigma = sigma
        self.confusion_pairs = tuple(confusion_pairs)
        rng = np.random.default_rng(seed)
        protos = rng.normal(0.0, 1.0, (vocab_size, dim))
        protos /= np.linalg.norm(protos, axis=1, keepdims=True)
        # pull each confusion partner next to its mate instead of
        # wherever the sphere sample landed
        for a, b in self.confusion_pairs:
            drift = rng.normal(0.0, 1.0, dim)
            drift /= np.linalg.norm(drift)
            protos[b] = protos[a] + confusion_gap * drift
            protos[b] /= np.linalg.norm(protos[b])
        self.prototypes = protos

    def render(self, symbol, rng):
        if not 0 <= symbol < self.vocab_size:
            raise ValueError("symbol %r outside vocabulary" % (symbol,))
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        return self.prototypes[symbol] + self.sigma * rng.normal(0.0, 1.0, self.dim)

    def nearest_prototype(self, glyph):
        d = np.linalg.norm(self.prototypes - glyph[None, :], axis=1)
        return int(d.argmin())


def render(symbol, seed, channel):
    return channel.render(symbol, seed)


class PerceptionModel:
    """Glyph scorer: hidden tanh layer into per-symbol logits."""

    def __init__(self, vocab_size, dim=GLYPH_DIM, hidden=64, seed=0):
        self.vocab_size = vocab_size
        self.dim = dim
        rng = np.random.default_rng(seed)
        self.net = TwoLayerNet(dim, hidden, vocab_size, rng)

    def parameters(self):
        return self.net.params

    def logits(self, glyphs):
        glyphs = np.asarray(glyphs, dtype=np.float64)
        if glyphs.ndim == 1:
            glyphs = glyphs[None, :]
        if glyphs.shape[1] != self.dim:
            raise DimensionMismatch(
                "glyph dimension %d, model expects %d" % (glyphs.shape[1], self.dim)
            )
        out, _ = self.net.logits(glyphs)
        return out

    def loss_and_grads(self, glyphs, labels):
        glyphs = np.asarray(glyphs, dtype=np.float64)
        if glyphs.shape[1] != self.dim:
            raise DimensionMismatch(
                "glyph dimension %d, model expects %d" % (glyphs.shape[1], self.dim)
            )
        loss, grads, _ = self.net.loss_and_grads(glyphs, labels)
        return loss, grads


def classify(glyph, model):
    """Distribution over the vocabulary for one glyph."""
    return softmax(model.logits(glyph))[0]


def classify_batch(glyphs, model):
    return softmax(model.logits(glyphs))


def sequence_log_prob(glyphs, symbols, model):
    """Log-probability of grounding the whole sequence, which by the
    pointwise factorization is the sum of per-token log-scores."""
    probs = classify_batch(np.asarray(glyphs), model)
    idx = np.arange(len(symbols))
    return float(np.log(np.maximum(probs[idx, list(symbols)], 1e-300)).sum())


def train_perception(pairs, model, lr=1e-4, batch_size=64, epochs=1, seed=0):
    """Minibatch cross-entropy over (glyph, symbol) pairs."""
    if not pairs:
        return model
    rng = np.random.default_rng(seed)
    glyphs = np.stack([np.asarray(p[0], dtype=np.float64) for p in pairs])
    labels = np.array([p[1] for p in pairs], dtype=np.int64)
    opt = Adam(model.parameters(), lr=lr)
    for _ in range(epochs):
        order = rng.permutation(len(pairs))
        for lo in range(0, len(pairs), batch_size):
            take = order[lo : lo + batch_size]
            loss, grads = model.loss_and_grads(glyphs[take], labels[take])
            opt.step(grads)
    return model


def calibrate_sigma(vocab_size, target=0.935, dim=GLYPH_DIM, seed=0,
                    confusion_pairs=(), samples=4000, tolerance=0.01):
    """Noise scale at which nearest-prototype accuracy lands near the
    target, found by bisection on a Monte-Carlo estimate."""

    def accuracy(sigma):
        channel = GlyphChannel(
            vocab_size, dim=dim, sigma=sigma, seed=seed,
            confusion_pairs=confusion_pairs,
        )
        rng = np.random.default_rng(seed + 1)
        hits = 0
        for i in range(samples):
            sym = i % vocab_size
            g = channel.render(sym, rng)
            hits += channel.nearest_prototype(g) == sym
        return hits / samples

    lo, hi = 0.0, 2.0
    for _ in range(24):
        mid = (lo + hi) / 2
        acc = accuracy(mid)
        if abs(acc - target) <= tolerance:
            return mid
        if acc > target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def write_glyphs(path, records, dim):
    """Binary records: u16 symbol id, then dim little-endian f32s."""
    with open(path, "wb") as fh:
        for symbol, features in records:
            features = np.asarray(features, dtype="<f4")
            if features.shape != (dim,):
                raise DimensionMismatch(
                    "record has %r features, expected %d" % (features.shape, dim)
                )
            fh.write(struct.pack("<H", symbol))
            fh.write(features.tobytes())


def read_glyphs(path, dim):
    out = []
    record = 2 + 4 * dim
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) % record:
        raise ValueError("glyph file length %d not a multiple of %d" % (len(blob), record))
    for lo in range(0, len(blob), record):
        (symbol,) = struct.unpack_from("<H", blob, lo)
        features = np.frombuffer(blob, dtype="<f4", count=dim, offset=lo + 2)
        out.append((symbol, features.astype(np.float64)))
    return out
