import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbsiqp import circuit as cc
from gibbsiqp.core import CapacityError, embed


def brute_unitary(c):
    """Independent dense product of embedded gate matrices."""
    u = np.eye(2 ** c.n, dtype=complex)
    for g in c.gates:
        u = embed(g.matrix(), list(g.qubits), c.n) @ u
    return u


def test_empty_circuit_identity():
    assert np.allclose(cc.build_unitary(cc.Circuit(3)), np.eye(8))


def test_single_h():
    u = cc.build_unitary(cc.Circuit(1, ((cc.H(0),),)))
    assert np.allclose(u, np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_cnot_involution():
    c = cc.Circuit(2, ((cc.CNOT(0, 1),), (cc.CNOT(0, 1),)))
    assert np.allclose(cc.build_unitary(c), np.eye(4))


def test_gate_matrices():
    t = cc.TPOW(0, 1).matrix()
    assert np.allclose(t, np.diag([1, np.exp(1j * np.pi / 4)]))
    assert cc.TPOW(0, 9).param == 1
    assert np.allclose(cc.ZROT(0, 0.3).matrix(), np.diag(np.exp([0.3j, -0.3j])))
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    assert np.allclose(cc.MZROT(0.4, [0, 1]).matrix(), np.diag(np.exp(0.4j * np.diag(zz))))


def test_unitary_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(10):
        c = cc.random_circuit(4, 4, rng, kinds=("H", "TPOW", "CNOT", "CZ", "ZROT"))
        assert np.allclose(cc.build_unitary(c), brute_unitary(c))


def test_layer_validation():
    with pytest.raises(ValueError):
        cc.Circuit(2, ((cc.H(0), cc.CNOT(0, 1)),))
    with pytest.raises(ValueError):
        cc.Circuit(1, ((cc.H(1),),))
    with pytest.raises(ValueError):
        cc.Gate("CNOT", (0, 0))


def test_unitary_capacity():
    with pytest.raises(CapacityError):
        cc.build_unitary(cc.Circuit(13))


def test_supports_identity():
    s = cc.supports(cc.Circuit(3))
    assert [set(x) for x in s.lightcone] == [{0}, {1}, {2}]
    assert [set(x) for x in s.z_support] == [{0}, {1}, {2}]
    assert s.ell == s.r == 1


def test_supports_single_cnot():
    s = cc.supports(cc.Circuit(2, ((cc.CNOT(0, 1),),)))
    assert [set(x) for x in s.lightcone] == [{0, 1}, {0, 1}]
    assert [set(x) for x in s.z_support] == [{0}, {0, 1}]


def test_z_support_matches_dense_conjugation():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        c = cc.random_circuit(n, int(rng.integers(1, 5)), rng, kinds=("H", "TPOW", "CNOT", "CZ", "ZROT"))
        for i in range(n):
            assert cc.z_support(c, i) == cc.z_support_dense(c, i)


def test_heisenberg_z_is_conjugated_z():
    rng = np.random.default_rng(2)
    c = cc.random_circuit(3, 3, rng)
    u = cc.build_unitary(c)
    z = embed(np.diag([1.0, -1.0]).astype(complex), [1], 3)
    xm = np.array([[0, 1], [1, 0]], dtype=complex)
    zm = np.diag([1.0, -1.0]).astype(complex)
    total = np.zeros((8, 8), dtype=complex)
    for (x, zz), v in cc.heisenberg_z(c, 1).items():
        xs = [q for q in range(3) if x >> q & 1]
        zs = [q for q in range(3) if zz >> q & 1]
        xo = np.eye(8, dtype=complex)
        zo = np.eye(8, dtype=complex)
        for q in xs:
            xo = xo @ embed(xm, [q], 3)
        for q in zs:
            zo = zo @ embed(zm, [q], 3)
        total += v * xo @ zo
    assert np.allclose(total, u @ z @ u.conj().T)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_support_inside_lightcone(seed):
    rng = np.random.default_rng(seed)
    c = cc.random_circuit(int(rng.integers(1, 7)), int(rng.integers(1, 5)), rng)
    s = cc.supports(c)
    for z, lc, i in zip(s.z_support, s.lightcone, range(c.n)):
        assert set(z) <= set(lc)
        assert i in lc


def test_distribution_empty_and_cluster():
    assert np.allclose(cc.output_distribution(cc.Circuit(2)), [1, 0, 0, 0])
    c = cc.build_iqp_cluster(2, 1, [0, 0])
    assert np.allclose(cc.output_distribution(c), [0.25] * 4)
    one = cc.build_iqp_cluster(1, 1, [0])
    assert np.allclose(cc.output_distribution(one), [1, 0])


def test_cluster_2x2_shape():
    c = cc.build_iqp_cluster(2, 2, cc.random_b(4, 7))
    assert sum(g.kind == "CZ" for g in c.gates) == 4
    assert c.depth <= 7
    assert cc.is_iqp_shaped(c)
    psi = brute_unitary(c)[:, 0]
    assert np.allclose(cc.output_distribution(c), np.abs(psi) ** 2)


def test_sampling_deterministic_and_consistent():
    c = cc.build_iqp_cluster(2, 1, [1, 3])
    a = cc.sample(c, 5, 2000)
    b = cc.sample(c, 5, 2000)
    assert a.shape == (2000, 2) and a.dtype == np.uint8
    assert np.array_equal(a, b)
    idx = a[:, 0].astype(int) * 2 + a[:, 1]
    emp = np.bincount(idx, minlength=4) / 2000
    assert np.abs(emp - cc.output_distribution(c)).max() < 0.05


def test_parse_dump_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    c = cc.random_circuit(4, 3, rng, kinds=("H", "TPOW", "CNOT", "CZ", "ZROT"))
    c = c.then(cc.Circuit(4, ((cc.MZROT(0.25, [0, 2, 3]),),)))
    path = tmp_path / "c.txt"
    path.write_text(cc.dump_circuit(c))
    assert cc.load_circuit(path) == c
    assert cc.circuit_hash(cc.load_circuit(path)) == cc.circuit_hash(c)


@pytest.mark.parametrize("text", ["H 0\n", "qubits 2\nFOO 1\n", "qubits 2\nCNOT 0\n",
                                  "qubits 1\nH 3\n", "qubits x\n"])
def test_parse_errors(text):
    with pytest.raises(cc.CircuitParseError):
        cc.parse_circuit(text)


def test_adjoint_and_depth():
    c = cc.Circuit(3, ((cc.H(0), cc.TPOW(1, 3)), (cc.CNOT(0, 1),), (cc.MZROT(0.3, [0, 1, 2]),)))
    u = cc.build_unitary(c)
    assert np.allclose(cc.build_unitary(c.adjoint()), u.conj().T)
    assert c.depth == 1 + 1 + 5
    assert c.two_qubit_depth == 2


def test_schedule_packs_layers():
    c = cc.schedule(3, [cc.H(0), cc.H(1), cc.CNOT(0, 1), cc.H(2)])
    assert len(c.layers) == 2
    assert len(c.layers[0]) == 3


def test_lightcone_gate_positions_replay():
    c = cc.Circuit(3, ((cc.CNOT(0, 1),), (cc.CNOT(1, 2),), (cc.H(0),)))
    gates = cc.lightcone_gates(c, 0)
    assert {g.kind for g in gates} == {"CNOT", "H"}
    assert len(gates) == 3
    assert cc.lightcones(c)[2] == {1, 2}
    assert cc.lightcones(c)[0] == {0, 1, 2}
