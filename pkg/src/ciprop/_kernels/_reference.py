"""Pure-numpy reference kernels for walk sampling and skip-gram training.

The compiled extension (``_compiled.pyx``) implements the same two entry
points with identical randomness: both consume a splitmix64 stream seeded
the same way, accumulate cumulative weights in the same order, and resolve
draws with the same left-bisection rule, so walk corpora match the
compiled kernel exactly and embeddings match up to BLAS-vs-scalar rounding
in the dot products.

These fall back in when the extension is not built; they are the slow
path (per-pair Python loops in the trainer), which is what the benchmark
in ``benchmarks/bench_kernels.py`` quantifies.
"""

from __future__ import annotations

import math

import numpy as np

_M64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_SGNS_SALT = 0x8E2F0B5D3C9A71E5


def _mix64(x):
    # splitmix64 output stage (avalanching bijection on 64-bit ints)
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return (x ^ (x >> 31)) & _M64


def _next_uniform(state):
    """Advance a splitmix64 state; returns (new_state, uniform in [0, 1))."""
    state = (state + _GOLD) & _M64
    z = _mix64(state)
    return state, (z >> 11) * 1.1102230246251565e-16  # 2**-53


def _walk_stream(seed, walk_index):
    return _mix64((int(seed) ^ ((walk_index + 1) * _GOLD)) & _M64)


def biased_walks(weights, walk_length, walks_per_node, p, q, seed):
    """Second-order biased random walks over a dense weight matrix.

    From edge (t -> v), the unnormalized probability of moving to x is
    ``weights[v, x] * b`` with bias b = 1/p when x == t, 1 when x has an
    edge back to t (weights[x, t] > 0), and 1/q otherwise. The first step
    out of the start node is first-order. A node whose weight row is
    all-zero repeats itself (cannot happen for strictly positive inputs).

    Returns an int32 array of shape (D * walks_per_node, walk_length);
    walk r * D + s starts at node s.
    """
    W = np.ascontiguousarray(weights, dtype=np.float64)
    d = W.shape[0]
    out = np.empty((d * walks_per_node, walk_length), dtype=np.int32)
    inv_p = 1.0 / p
    inv_q = 1.0 / q
    adjacency = W > 0.0
    for r in range(walks_per_node):
        for s in range(d):
            widx = r * d + s
            st = _walk_stream(seed, widx)
            out[widx, 0] = s
            cur = s
            prev = -1
            for step in range(1, walk_length):
                row = W[cur]
                if prev < 0:
                    bw = row
                else:
                    bw = np.where(adjacency[:, prev], row, row * inv_q)
                    bw[prev] = row[prev] * inv_p
                    bw[row == 0.0] = 0.0
                cum = np.cumsum(bw)
                total = cum[-1]
                if total <= 0.0:
                    nxt = cur
                else:
                    st, u = _next_uniform(st)
                    nxt = int(np.searchsorted(cum, u * total, side="left"))
                    if nxt >= d:
                        nxt = d - 1
                out[widx, step] = nxt
                prev = cur
                cur = nxt
    return out


def sgns_train(walks, n_nodes, dim, window, negative, epochs, lr0, lr_min, noise_cdf, seed, syn0, syn1):
    """Skip-gram with negative sampling over a walk corpus, in place.

    ``syn0`` holds the input (node) vectors and is the embedding that
    callers keep; ``syn1`` holds the output vectors. The learning rate
    decays linearly per processed token down to ``lr_min``. Negative
    targets are drawn by left-bisecting ``noise_cdf``; a draw colliding
    with the positive context is skipped. Returns the mean pair loss over
    the final epoch.
    """
    walks = np.asarray(walks)
    n_walks, length = walks.shape
    st = _mix64((int(seed) ^ _SGNS_SALT) & _M64)
    total_tokens = max(epochs * n_walks * length, 1)
    tok = 0
    loss_sum = 0.0
    loss_count = 0
    last_epoch = epochs - 1
    for ep in range(epochs):
        track = ep == last_epoch
        for w in range(n_walks):
            walk = walks[w]
            for i in range(length):
                center = int(walk[i])
                lr = lr0 * (1.0 - tok / total_tokens)
                if lr < lr_min:
                    lr = lr_min
                tok += 1
                v = syn0[center]
                lo = i - window if i - window > 0 else 0
                hi = i + window + 1 if i + window + 1 < length else length
                for j in range(lo, hi):
                    if j == i:
                        continue
                    context = int(walk[j])
                    grad_v = np.zeros(dim, dtype=np.float64)
                    for k in range(negative + 1):
                        if k == 0:
                            target = context
                            label = 1.0
                        else:
                            st, u = _next_uniform(st)
                            target = int(np.searchsorted(noise_cdf, u, side="left"))
                            if target >= n_nodes:
                                target = n_nodes - 1
                            if target == context:
                                continue
                            label = 0.0
                        u_vec = syn1[target]
                        f = float(np.dot(v, u_vec))
                        s = 1.0 / (1.0 + math.exp(-f))
                        g = (label - s) * lr
                        if track:
                            prob = s if label == 1.0 else 1.0 - s
                            loss_sum += -math.log(prob if prob > 1e-12 else 1e-12)
                            loss_count += 1
                        grad_v += g * u_vec
                        u_vec += g * v
                    v += grad_v
    return loss_sum / max(loss_count, 1)
