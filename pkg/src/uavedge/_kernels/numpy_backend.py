"""Vectorized numpy implementation of the MLP kernels.

Conventions shared with the compiled backend: activations are row vectors,
layer l maps a -> relu(a @ W[l] + b[l]) with a linear last layer; the loss
is the batch mean of (Q[i, action_i] - target_i)**2; the ReLU subgradient
at exactly zero is zero.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def forward(ws, bs, x):
    a = np.asarray(x, dtype=np.float64)
    for W, b in zip(ws[:-1], bs[:-1]):
        a = np.maximum(a @ W + b, 0.0)
    return a @ ws[-1] + bs[-1]


def forward_batch(ws, bs, X):
    return forward(ws, bs, X)


def loss_and_grads(ws, bs, X, actions, targets):
    """Batch MSE on the chosen-action outputs and its parameter gradients."""
    n_layers = len(ws)
    acts = [np.asarray(X, dtype=np.float64)]
    for W, b in zip(ws[:-1], bs[:-1]):
        acts.append(np.maximum(acts[-1] @ W + b, 0.0))
    q = acts[-1] @ ws[-1] + bs[-1]

    batch = q.shape[0]
    rows = np.arange(batch)
    err = q[rows, actions] - targets
    loss = float(np.mean(err * err))

    delta = np.zeros_like(q)
    delta[rows, actions] = 2.0 * err / batch

    dws = [None] * n_layers
    dbs = [None] * n_layers
    for layer in range(n_layers - 1, -1, -1):
        dws[layer] = acts[layer].T @ delta
        dbs[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ ws[layer].T) * (acts[layer] > 0.0)
    return loss, dws, dbs


def adam_step(ws, bs, dws, dbs, mws, mbs, vws, vbs, t, lr, beta1, beta2, eps):
    """One adaptive-moment update, in place on ws/bs and the moment buffers."""
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p, g, m, v in zip(list(ws) + list(bs), list(dws) + list(dbs),
                          list(mws) + list(mbs), list(vws) + list(vbs)):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
