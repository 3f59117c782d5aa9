# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for walk sampling and skip-gram training.

Mirrors ``_reference.py`` draw for draw: same splitmix64 streams, same
accumulation order, same left-bisection rule. Keep the two files in sync;
the parity tests compare their outputs directly.
"""

from libc.math cimport exp, log
from libc.stdint cimport uint64_t, int32_t

import numpy as np


cdef uint64_t GOLD = 0x9E3779B97F4A7C15U
cdef uint64_t SGNS_SALT = 0x8E2F0B5D3C9A71E5U
cdef double INV_2_53 = 1.1102230246251565e-16


cdef inline uint64_t mix64(uint64_t x) nogil:
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9U
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBU
    return x ^ (x >> 31)


cdef inline double next_uniform(uint64_t *state) nogil:
    state[0] = state[0] + GOLD
    return <double>(mix64(state[0]) >> 11) * INV_2_53


cdef inline Py_ssize_t bisect_left(const double[::1] a, double u, Py_ssize_t n) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def biased_walks(weights, int walk_length, int walks_per_node, double p, double q, seed):
    """Second-order biased walks; see the reference kernel for semantics."""
    cdef const double[:, ::1] W = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t d = W.shape[0]
    cdef uint64_t useed = <uint64_t>(int(seed) & ((1 << 64) - 1))
    out_arr = np.empty((d * walks_per_node, walk_length), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    cdef double inv_p = 1.0 / p
    cdef double inv_q = 1.0 / q
    cdef Py_ssize_t r, s, widx, step, x, cur, prev, nxt
    cdef uint64_t st
    cdef double w, bw, total, acc, target, u
    with nogil:
        for r in range(walks_per_node):
            for s in range(d):
                widx = r * d + s
                st = mix64(useed ^ ((<uint64_t>(widx + 1)) * GOLD))
                out[widx, 0] = <int32_t>s
                cur = s
                prev = -1
                for step in range(1, walk_length):
                    total = 0.0
                    for x in range(d):
                        w = W[cur, x]
                        if w == 0.0:
                            continue
                        if prev < 0:
                            bw = w
                        elif x == prev:
                            bw = w * inv_p
                        elif W[x, prev] > 0.0:
                            bw = w
                        else:
                            bw = w * inv_q
                        total += bw
                    if total <= 0.0:
                        nxt = cur
                    else:
                        u = next_uniform(&st)
                        target = u * total
                        acc = 0.0
                        nxt = d - 1
                        for x in range(d):
                            w = W[cur, x]
                            if w == 0.0:
                                continue
                            if prev < 0:
                                bw = w
                            elif x == prev:
                                bw = w * inv_p
                            elif W[x, prev] > 0.0:
                                bw = w
                            else:
                                bw = w * inv_q
                            acc += bw
                            if acc >= target:
                                nxt = x
                                break
                    out[widx, step] = <int32_t>nxt
                    prev = cur
                    cur = nxt
    return out_arr


def sgns_train(walks, int n_nodes, int dim, int window, int negative,
               int epochs, double lr0, double lr_min, noise_cdf, seed,
               syn0, syn1):
    """Skip-gram with negative sampling; see the reference kernel."""
    cdef const int32_t[:, ::1] corpus = np.ascontiguousarray(walks, dtype=np.int32)
    cdef const double[::1] cdf = np.ascontiguousarray(noise_cdf, dtype=np.float64)
    cdef double[:, ::1] v0 = syn0
    cdef double[:, ::1] v1 = syn1
    cdef uint64_t st = mix64(<uint64_t>(int(seed) & ((1 << 64) - 1)) ^ SGNS_SALT)
    cdef Py_ssize_t n_walks = corpus.shape[0]
    cdef Py_ssize_t length = corpus.shape[1]
    cdef long long total_tokens = <long long>epochs * n_walks * length
    cdef long long tok = 0
    cdef double loss_sum = 0.0
    cdef long long loss_count = 0
    cdef int last_epoch = epochs - 1
    cdef bint track
    cdef Py_ssize_t ep, w, i, j, k, e, lo, hi, center, context, target
    cdef double lr, f, s, g, u, prob
    grad_arr = np.zeros(dim, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    if total_tokens <= 0:
        total_tokens = 1
    with nogil:
        for ep in range(epochs):
            track = ep == last_epoch
            for w in range(n_walks):
                for i in range(length):
                    center = corpus[w, i]
                    lr = lr0 * (1.0 - <double>tok / <double>total_tokens)
                    if lr < lr_min:
                        lr = lr_min
                    tok += 1
                    lo = i - window if i - window > 0 else 0
                    hi = i + window + 1 if i + window + 1 < length else length
                    for j in range(lo, hi):
                        if j == i:
                            continue
                        context = corpus[w, j]
                        for e in range(dim):
                            grad[e] = 0.0
                        for k in range(negative + 1):
                            if k == 0:
                                target = context
                                s = 1.0
                            else:
                                u = next_uniform(&st)
                                target = bisect_left(cdf, u, cdf.shape[0])
                                if target >= n_nodes:
                                    target = n_nodes - 1
                                if target == context:
                                    continue
                                s = 0.0
                            f = 0.0
                            for e in range(dim):
                                f += v0[center, e] * v1[target, e]
                            prob = 1.0 / (1.0 + exp(-f))
                            g = (s - prob) * lr
                            if track:
                                prob = prob if s == 1.0 else 1.0 - prob
                                if prob < 1e-12:
                                    prob = 1e-12
                                loss_sum += -log(prob)
                                loss_count += 1
                            for e in range(dim):
                                grad[e] += g * v1[target, e]
                            for e in range(dim):
                                v1[target, e] += g * v0[center, e]
                        for e in range(dim):
                            v0[center, e] += grad[e]
    if loss_count < 1:
        loss_count = 1
    return loss_sum / <double>loss_count
