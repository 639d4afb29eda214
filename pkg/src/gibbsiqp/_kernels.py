"""Bit-level hot loops: tree encoding/decoding and block majority.

Each kernel has a numba implementation and a vectorized numpy one with
identical semantics. Set ``GIBBSIQP_DISABLE_NUMBA=1`` to force numpy.
"""

import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("GIBBSIQP_DISABLE_NUMBA", "") not in ("1", "true", "yes")


# ------------------------------------------------------------------ numpy

def tree_encode_np(bits, sched_parent, sched_child):
    """XOR each parent bit into its child following the schedule, in place."""
    for p, c in zip(sched_parent, sched_child):
        bits[:, c] ^= bits[:, p]
    return bits


def tree_decode_np(meas, parents, child_ptr, child_idx, root):
    """Iterated majority; returns the root guess per row of ``meas``."""
    work = meas.copy()
    guess = np.zeros(meas.shape[0], dtype=np.uint8)
    for p in parents:
        kids = child_idx[child_ptr[p]:child_ptr[p + 1]]
        cnt = work[:, kids].sum(axis=1, dtype=np.int64)
        s = (2 * cnt > len(kids)).astype(np.uint8)
        if p == root:
            guess = s
        else:
            work[:, p] = s ^ meas[:, p]
    return guess


def block_majority_np(y, r):
    t, m = y.shape
    blocks = y.reshape(t, m // r, r).sum(axis=2, dtype=np.int64)
    return (2 * blocks > r).astype(np.uint8)


def bits_to_indices_np(bits):
    n = bits.shape[1]
    w = (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    return bits.astype(np.int64) @ w


# ------------------------------------------------------------------ numba

if HAVE_NUMBA:
    @njit(cache=True)
    def tree_encode_nb(bits, sched_parent, sched_child):
        for t in range(bits.shape[0]):
            for e in range(sched_parent.shape[0]):
                bits[t, sched_child[e]] ^= bits[t, sched_parent[e]]
        return bits

    @njit(cache=True)
    def tree_decode_nb(meas, parents, child_ptr, child_idx, root):
        T, k = meas.shape
        guess = np.zeros(T, dtype=np.uint8)
        work = np.empty(k, dtype=np.uint8)
        for t in range(T):
            for j in range(k):
                work[j] = meas[t, j]
            for pi in range(parents.shape[0]):
                p = parents[pi]
                cnt = 0
                nk = child_ptr[p + 1] - child_ptr[p]
                for j in range(child_ptr[p], child_ptr[p + 1]):
                    cnt += work[child_idx[j]]
                s = 1 if 2 * cnt > nk else 0
                if p == root:
                    guess[t] = s
                else:
                    work[p] = s ^ meas[t, p]
        return guess

    @njit(cache=True)
    def block_majority_nb(y, r):
        T, m = y.shape
        nb = m // r
        out = np.zeros((T, nb), dtype=np.uint8)
        for t in range(T):
            for b in range(nb):
                cnt = 0
                for j in range(b * r, (b + 1) * r):
                    cnt += y[t, j]
                out[t, b] = 1 if 2 * cnt > r else 0
        return out

    @njit(cache=True)
    def bits_to_indices_nb(bits):
        T, n = bits.shape
        out = np.zeros(T, dtype=np.int64)
        for t in range(T):
            v = 0
            for j in range(n):
                v = (v << 1) | bits[t, j]
            out[t] = v
        return out


def _pick(name):
    if USE_NUMBA:
        return globals()[name + "_nb"]
    return globals()[name + "_np"]


tree_encode = _pick("tree_encode")
tree_decode = _pick("tree_decode")
block_majority = _pick("block_majority")
bits_to_indices = _pick("bits_to_indices")
