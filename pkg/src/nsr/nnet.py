"""Dense network kit with hand-written gradients.

Two users: the transition classifier (embedding gather into a tanh
hidden layer) and the glyph scorer.  Both need exact analytic
gradients, checked elsewhere against central finite differences, so
every backward pass is written out rather than delegated.  All math is
float64; serialization quantizes.
"""

from __future__ import annotations

import numpy as np


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs, labels):
    n = probs.shape[0]
    picked = probs[np.arange(n), labels]
    return float(-np.log(np.maximum(picked, 1e-300)).mean())


class Adam:
    """Bias-corrected Adam over a dict of parameter arrays."""

    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            if k not in self.params:
                continue
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            mhat = self.m[k] / (1 - b1**self.t)
            vhat = self.v[k] / (1 - b2**self.t)
            self.params[k] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


class TwoLayerNet:
    """x @ W1 + b1 -> tanh -> optional dropout -> @ W2 + b2 -> softmax."""

    def __init__(self, n_in, n_hidden, n_out, rng):
        s1 = np.sqrt(2.0 / (n_in + n_hidden))
        s2 = np.sqrt(2.0 / (n_hidden + n_out))
        self.params = {
            "W1": rng.normal(0.0, s1, (n_in, n_hidden)),
            "b1": np.zeros(n_hidden),
            "W2": rng.normal(0.0, s2, (n_hidden, n_out)),
            "b2": np.zeros(n_out),
        }

    def logits(self, x, dropout=0.0, rng=None):
        p = self.params
        h = np.tanh(x @ p["W1"] + p["b1"])
        mask = None
        if dropout > 0.0:
            # inverted dropout keeps eval-time activations unscaled
            mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
            h = h * mask
        return h @ p["W2"] + p["b2"], (x, h, mask)

    def probs(self, x):
        out, _ = self.logits(x)
        return softmax(out)

    def loss_and_grads(self, x, labels, dropout=0.0, rng=None):
        """Mean cross-entropy with gradients for every parameter and
        for the input batch (the embedding layer needs dX)."""
        p = self.params
        out, (x, h, mask) = self.logits(x, dropout, rng)
        probs = softmax(out)
        n = x.shape[0]
        loss = cross_entropy(probs, labels)

        dout = probs.copy()
        dout[np.arange(n), labels] -= 1.0
        dout /= n
        grads = {
            "W2": h.T @ dout,
            "b2": dout.sum(axis=0),
        }
        dh = dout @ p["W2"].T
        if mask is not None:
            dh = dh * mask
        # h kept pre-dropout would be wrong here: tanh' needs the
        # pre-mask activation, so recompute it
        pre = np.tanh(x @ p["W1"] + p["b1"])
        dpre = dh * (1.0 - pre * pre)
        grads["W1"] = x.T @ dpre
        grads["b1"] = dpre.sum(axis=0)
        dx = dpre @ p["W1"].T
        return loss, grads, dx


class Embedding:
    """Row-gather table whose gradient scatter-adds back."""

    def __init__(self, n_rows, dim, rng):
        self.table = rng.normal(0.0, 0.1, (n_rows, dim))

    def gather(self, ids):
        return self.table[ids]

    def grad_from(self, ids, dvecs):
        g = np.zeros_like(self.table)
        np.add.at(g, ids.reshape(-1), dvecs.reshape(-1, self.table.shape[1]))
        return g
