import math

import numpy as np
import pytest

from gibbsiqp import circuit as cc
from gibbsiqp import repcode as rc


def core_diag(c):
    return np.diag(cc.build_unitary(cc.Circuit(c.n, c.layers[1:-1])))


def test_tpow_program():
    c = cc.Circuit(1, ((cc.H(0),), (cc.TPOW(0, 1),), (cc.H(0),)))
    prog = rc.iqp_to_program(c)
    assert prog.M.tolist() == [[1]]
    assert abs(prog.theta[0] + math.pi / 8) < 1e-15
    assert abs(prog.phase - math.pi / 8) < 1e-15
    assert np.allclose(prog.diagonal(), [1, np.exp(1j * math.pi / 4)])


def test_cz_program():
    c = cc.Circuit(2, (tuple(cc.H(q) for q in range(2)), (cc.CZ(0, 1),), tuple(cc.H(q) for q in range(2))))
    prog = rc.iqp_to_program(c)
    assert len(prog.M) == 3 and prog.M.sum(axis=1).max() <= 2
    assert np.abs(prog.diagonal() - [1, 1, 1, -1]).max() <= 1e-12


def test_program_round_trip_cluster():
    rng = np.random.default_rng(0)
    c = cc.build_iqp_cluster(2, 2, rng.integers(0, 8, 4))
    prog = rc.iqp_to_program(c)
    assert np.abs(prog.diagonal() - core_diag(c)).max() <= 1e-12
    for dec in (False, True):
        assert np.allclose(cc.output_distribution(rc.program_to_circuit(prog, dec)), cc.output_distribution(c))


def test_encode_r1_and_rows():
    prog = rc.IQPProgram(2, [[1, 0], [1, 1]], [0.3, -0.2])
    same = rc.encode_program(prog, 1)
    assert np.array_equal(same.M, prog.M)
    enc = rc.encode_program(rc.IQPProgram(2, [[1, 0]], [0.1]), 3)
    assert enc.M.tolist() == [[1, 1, 1, 0, 0, 0]]


def test_encoding_identity_exhaustive():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        for r in (1, 2, 3):
            M = rng.integers(0, 2, size=(4, n))
            M[M.sum(axis=1) == 0, 0] = 1
            prog = rc.IQPProgram(n, M, rng.uniform(-3, 3, 4), 0.2)
            enc = rc.encode_program(prog, r).diagonal()
            base = prog.diagonal()
            for x in range(2 ** (n * r)):
                bits = [(x >> (n * r - 1 - j)) & 1 for j in range(n * r)]
                y = 0
                for i in range(n):
                    y = 2 * y + (sum(bits[i * r:(i + 1) * r]) % 2)
                assert abs(enc[x] - base[y]) <= 1e-12


def test_multiz_small():
    c1 = rc.decompose_multiz(1, 0.4)
    assert [g.kind for g in c1.gates] == ["ZROT"]
    c2 = rc.decompose_multiz(2, 0.4)
    assert [g.kind for g in c2.gates] == ["CNOT", "ZROT", "CNOT"]
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    assert np.allclose(cc.build_unitary(c2), np.diag(np.exp(0.4j * np.diag(zz))))


def test_multiz_k4():
    c = rc.decompose_multiz(4, 0.7)
    target = cc.MZROT(0.7, range(4)).matrix()
    assert np.abs(cc.build_unitary(c) - target).max() <= 1e-12
    assert c.depth == 5


@pytest.mark.parametrize("k", range(1, 7))
def test_multiz_depth_formula(k):
    c = rc.decompose_multiz(k, 0.3)
    assert c.depth == 2 * math.ceil(math.log2(k)) + 1
    assert np.abs(cc.build_unitary(c) - cc.MZROT(0.3, range(k)).matrix()).max() <= 1e-10


def test_block_decode():
    G = rc.generator_matrix(3, 5)
    x = np.array([1, 0, 1])
    y = (G @ x) % 2
    assert list(rc.block_decode(y, 5)) == [1, 0, 1]
    y3 = np.array([1, 0, 1, 0, 0, 0])
    assert list(rc.block_decode(y3, 3)) == [1, 0]
    with pytest.raises(ValueError):
        rc.block_decode(y3, 2)


def test_block_decode_binomial_rate():
    rng = np.random.default_rng(2)
    trials = 10 ** 5
    y = (rng.random((trials, 20)) < 0.2).astype(np.uint8)
    rate = rc.block_decode(y, 5).mean()
    exact = rc.majority_tail(5, 0.2)
    assert abs(exact - 0.05792) < 1e-12
    assert abs(rate - exact) <= 4 * math.sqrt(exact * (1 - exact) / (4 * trials))


def test_bound_arithmetic():
    assert abs(rc.repcode_bound(4, 0.26, 21) - 4 * 0.7696 ** 10.5) < 1e-12
    assert abs(rc.repcode_bound(4, 0.26, 21) - 0.2558) < 1e-3
    assert rc.majority_tail(9, 0.1) <= (4 * 0.1 * 0.9) ** 4.5


def test_pipeline():
    base = cc.build_iqp_cluster(2, 1, cc.random_b(2, 7))
    res = rc.repcode_pipeline(base, 9, 0.05, 0.05, 14, 10 ** 5)
    assert abs(res.q - 0.095) < 1e-15
    assert res.measured_tvd <= res.bound + 3 * res.stderr
    with pytest.raises(ValueError):
        rc.repcode_pipeline(base, 4, 0.05, 0.05, 0, 10)


def test_program_rejects_zero_rows():
    with pytest.raises(ValueError):
        rc.IQPProgram(2, [[0, 0]], [0.1])
