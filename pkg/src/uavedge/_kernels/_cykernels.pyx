# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled MLP kernels for the training hot loop.

Semantics mirror numpy_backend exactly: row-vector activations, ReLU hidden
layers with a linear head, batch-mean squared error on the chosen-action
outputs, zero subgradient at the ReLU kink. Plain C loops beat BLAS-backed
numpy here because the layers are tiny and per-call overhead dominates.
"""

from libc.math cimport sqrt, pow

import numpy as np

NAME = "c"


cdef void _dense(double[:, ::1] inp, double[:, ::1] W, double[::1] b,
                 double[:, ::1] out, bint relu) noexcept nogil:
    cdef Py_ssize_t n = inp.shape[0]
    cdef Py_ssize_t d_in = W.shape[0]
    cdef Py_ssize_t d_out = W.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(d_out):
            acc = b[j]
            for k in range(d_in):
                acc += inp[i, k] * W[k, j]
            if relu and acc < 0.0:
                acc = 0.0
            out[i, j] = acc


def forward(list ws, list bs, x):
    X = np.asarray(x, dtype=np.float64)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[None, :]
    out = forward_batch(ws, bs, X)
    return out[0] if squeeze else out


def forward_batch(list ws, list bs, X):
    cdef Py_ssize_t n_layers = len(ws)
    cdef Py_ssize_t l
    cur = np.ascontiguousarray(X, dtype=np.float64)
    for l in range(n_layers):
        nxt = np.empty((cur.shape[0], ws[l].shape[1]))
        _dense(cur, ws[l], bs[l], nxt, l < n_layers - 1)
        cur = nxt
    return cur


def loss_and_grads(list ws, list bs, X, actions, targets):
    cdef Py_ssize_t n_layers = len(ws)
    cdef Py_ssize_t l, i, j, k

    acts = [np.ascontiguousarray(X, dtype=np.float64)]
    for l in range(n_layers):
        nxt = np.empty((acts[0].shape[0], ws[l].shape[1]))
        _dense(acts[l], ws[l], bs[l], nxt, l < n_layers - 1)
        acts.append(nxt)

    cdef double[:, ::1] q = acts[n_layers]
    cdef long[::1] act_idx = np.ascontiguousarray(actions, dtype=np.int64)
    cdef double[::1] tgt = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t batch = q.shape[0]
    cdef double loss = 0.0, err

    delta_arr = np.zeros((batch, q.shape[1]))
    cdef double[:, ::1] delta = delta_arr
    for i in range(batch):
        err = q[i, act_idx[i]] - tgt[i]
        loss += err * err
        delta[i, act_idx[i]] = 2.0 * err / batch
    loss /= batch

    dws = [None] * n_layers
    dbs = [None] * n_layers
    cdef double[:, ::1] a_prev, dw, w, new_delta
    cdef double[::1] db
    cdef double acc
    for l in range(n_layers - 1, -1, -1):
        a_prev = acts[l]
        dw_arr = np.empty((a_prev.shape[1], delta.shape[1]))
        db_arr = np.empty(delta.shape[1])
        dw = dw_arr
        db = db_arr
        with nogil:
            for j in range(delta.shape[1]):
                acc = 0.0
                for i in range(batch):
                    acc += delta[i, j]
                db[j] = acc
            for k in range(a_prev.shape[1]):
                for j in range(delta.shape[1]):
                    acc = 0.0
                    for i in range(batch):
                        acc += a_prev[i, k] * delta[i, j]
                    dw[k, j] = acc
        dws[l] = dw_arr
        dbs[l] = db_arr
        if l > 0:
            w = ws[l]
            nd_arr = np.empty((batch, a_prev.shape[1]))
            new_delta = nd_arr
            with nogil:
                for i in range(batch):
                    for k in range(a_prev.shape[1]):
                        if a_prev[i, k] > 0.0:
                            acc = 0.0
                            for j in range(delta.shape[1]):
                                acc += delta[i, j] * w[k, j]
                            new_delta[i, k] = acc
                        else:
                            new_delta[i, k] = 0.0
            delta_arr = nd_arr
            delta = new_delta
    return loss, dws, dbs


cdef void _adam_buf(double[::1] p, double[::1] g, double[::1] m, double[::1] v,
                    double lr, double beta1, double beta2, double eps,
                    double c1, double c2) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(p.shape[0]):
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
        p[i] -= lr * (m[i] / c1) / (sqrt(v[i] / c2) + eps)


def adam_step(list ws, list bs, list dws, list dbs, list mws, list mbs,
              list vws, list vbs, long t, double lr, double beta1,
              double beta2, double eps):
    cdef double c1 = 1.0 - pow(beta1, t)
    cdef double c2 = 1.0 - pow(beta2, t)
    cdef Py_ssize_t l
    for l in range(len(ws)):
        _adam_buf(ws[l].reshape(-1), dws[l].reshape(-1), mws[l].reshape(-1),
                  vws[l].reshape(-1), lr, beta1, beta2, eps, c1, c2)
        _adam_buf(bs[l], dbs[l], mbs[l], vbs[l], lr, beta1, beta2, eps, c1, c2)
