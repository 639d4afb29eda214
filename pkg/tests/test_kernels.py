import os
import subprocess
import sys

import numpy as np
import pytest

from gibbsiqp import _kernels as K
from gibbsiqp import distill

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def gadget_arrays(B, D):
    g = distill.build_gadget(B, D)
    ptr, idx = g.child_csr
    return g, ptr, idx


@needs_numba
@pytest.mark.parametrize("B,D", [(3, 2), (3, 4), (5, 3)])
def test_tree_kernels_agree(B, D):
    g, ptr, idx = gadget_arrays(B, D)
    rng = np.random.default_rng(B * 10 + D)
    bits = (rng.random((500, g.k)) < 0.3).astype(np.uint8)
    a = K.tree_encode_np(bits.copy(), g.sched_parent, g.sched_child)
    b = K.tree_encode_nb(bits.copy(), g.sched_parent, g.sched_child)
    assert np.array_equal(a, b)
    da = K.tree_decode_np(a, g.decode_order, ptr, idx, 0)
    db = K.tree_decode_nb(a, g.decode_order, ptr, idx, 0)
    assert np.array_equal(da, db)


@needs_numba
def test_block_and_index_kernels_agree():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, (300, 35)).astype(np.uint8)
    assert np.array_equal(K.block_majority_np(y, 7), K.block_majority_nb(y, 7))
    bits = rng.integers(0, 2, (300, 12)).astype(np.uint8)
    assert np.array_equal(K.bits_to_indices_np(bits), K.bits_to_indices_nb(bits))


def test_bits_to_indices_msb_first():
    bits = np.array([[1, 0, 0], [0, 0, 1]], dtype=np.uint8)
    assert list(K.bits_to_indices(bits)) == [4, 1]


def test_env_flag_selects_numpy():
    code = "from gibbsiqp import _kernels as K; print(K.USE_NUMBA, K.tree_decode.__name__)"
    env = dict(os.environ, GIBBSIQP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "tree_decode_np"]


def test_mc_same_under_both_backends():
    code = ("from gibbsiqp import distill; r = distill.mc_failure_rate(3, 3, 0.2, 70000, 5); "
            "print(repr(r.estimate))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, GIBBSIQP_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
