"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--rows N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from gibbsiqp import _kernels as K
from gibbsiqp import distill


def cases(rows, rng):
    g = distill.build_gadget(3, 4)
    ptr, idx = g.child_csr
    noise = (rng.random((rows, g.k)) < 0.1).astype(np.uint8)
    enc = K.tree_encode_np(noise.copy(), g.sched_parent, g.sched_child)
    y = rng.integers(0, 2, (rows, 4 * 9)).astype(np.uint8)
    bits = rng.integers(0, 2, (rows, 16)).astype(np.uint8)
    return {
        "tree_encode (B=3, D=4)": lambda f: f(noise.copy(), g.sched_parent, g.sched_child),
        "tree_decode (B=3, D=4)": lambda f: f(enc, g.decode_order, ptr, idx, 0),
        "block_majority (n=4, r=9)": lambda f: f(y, 9),
        "bits_to_indices (n=16)": lambda f: f(bits),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    names = ["tree_encode", "tree_decode", "block_majority", "bits_to_indices"]
    print("%-28s %12s %12s %8s" % ("kernel", "numpy [ms]", "numba [ms]", "speedup"))
    for name, (label, call) in zip(names, cases(args.rows, rng).items()):
        np_fn = getattr(K, name + "_np")
        nb_fn = getattr(K, name + "_nb")
        a, b = call(np_fn), call(nb_fn)  # warm-up, also compiles
        assert np.array_equal(a, b), name
        t_np = min(timeit.repeat(lambda: call(np_fn), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: call(nb_fn), number=1, repeat=args.repeat)) * 1e3
        print("%-28s %12.2f %12.2f %7.1fx" % (label, t_np, t_nb, t_np / t_nb))


if __name__ == "__main__":
    main()
