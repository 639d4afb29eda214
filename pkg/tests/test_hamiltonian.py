import itertools
import math

import numpy as np
import pytest

from gibbsiqp import circuit as cc
from gibbsiqp import hamiltonian as hm
from gibbsiqp.core import embed, partial_trace


def test_identity_parent_diag():
    hp = hm.build_parent(cc.Circuit(2))
    assert np.allclose(hp.H, np.diag([0, 1, 1, 2]))


def test_single_cnot_parent():
    c = cc.Circuit(2, ((cc.CNOT(0, 1),),))
    hp = hm.build_parent(c)
    assert hp.terms[1].support == (0, 1)
    assert np.allclose(np.sort(np.linalg.eigvalsh(hp.H)), [0, 1, 1, 2])
    # dense oracle: CNOT |1><1|_1 CNOT
    cnot = np.eye(4)[[0, 1, 3, 2]]
    proj = embed(np.diag([0.0, 1.0]), [1], 2)
    assert np.allclose(hp.terms[1].dense, cnot @ proj @ cnot)


def test_terms_are_commuting_projectors():
    rng = np.random.default_rng(0)
    for _ in range(10):
        c = cc.random_circuit(4, 3, rng)
        hp = hm.build_parent(c)
        for a, b in itertools.product(hp.terms, repeat=2):
            assert np.allclose(a.dense @ b.dense, b.dense @ a.dense)
        for t in hp.terms:
            assert np.allclose(t.dense @ t.dense, t.dense)
            assert np.allclose(hm.local_term_matrix(hp, t.index, range(4)), t.dense)


def test_local_terms_reconstruct_dense():
    c = cc.build_iqp_cluster(2, 2, cc.random_b(4, 7))
    hp = hm.build_parent(c)
    for t in hp.terms:
        assert np.allclose(embed(t.local, list(t.support), 4), t.dense)


def test_spectrum_integer_with_binomial_degeneracy():
    c = cc.random_circuit(4, 3, np.random.default_rng(1))
    hp = hm.build_parent(c)
    w = np.round(np.linalg.eigvalsh(hp.H)).astype(int)
    counts = np.bincount(w, minlength=5)
    assert list(counts) == [math.comb(4, k) for k in range(5)]


def test_eigenprojector():
    hp = hm.build_parent(cc.Circuit(2))
    assert np.allclose(hm.eigenprojector(hp, 1), np.diag([0, 1, 1, 0]))
    hp3 = hm.build_parent(cc.random_circuit(3, 2, np.random.default_rng(2)))
    p = hm.eigenprojector(hp3, 1)
    assert round(np.trace(p).real) == 3
    assert np.allclose(sum(hm.eigenprojector(hp3, k) for k in range(4)), np.eye(8))
    with pytest.raises(ValueError):
        hm.eigenprojector(hp3, 4)


def test_gibbs_infinite_temperature():
    rho, z = hm.gibbs_state(hm.build_parent(cc.Circuit(2)), 0.0)
    assert np.allclose(rho, np.eye(4) / 4)
    assert abs(z - 4) < 1e-12


def test_partition_function_ln2():
    assert abs(hm.partition_function(2, math.log(2)) - 2.25) < 1e-12
    hp = hm.build_parent(cc.random_circuit(2, 3, np.random.default_rng(3)))
    assert abs(hm.gibbs_state(hp, math.log(2))[1] - 2.25) < 1e-12


def test_gibbs_product_in_rotated_frame():
    c = cc.random_circuit(3, 3, np.random.default_rng(4))
    hp = hm.build_parent(c)
    beta = 0.8
    rho, _ = hm.gibbs_state(hp, beta)
    single = np.diag([1.0, math.exp(-beta)]) / (1 + math.exp(-beta))
    prod = np.kron(np.kron(single, single), single)
    assert np.allclose(hp.unitary.conj().T @ rho @ hp.unitary, prod)


def test_negative_beta_rejected():
    with pytest.raises(ValueError):
        hm.gibbs_state(hm.build_parent(cc.Circuit(1)), -1)


def test_coloring_identity():
    hp = hm.build_parent(cc.Circuit(3))
    assert hm.color_interactions(hp) == [0, 0, 0]
    assert hm.coloring_bound(hp) == 2


def test_coloring_valid_random():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        hp = hm.build_parent(cc.random_circuit(n, int(rng.integers(1, 4)), rng))
        colors = hm.color_interactions(hp)
        for i, j in itertools.combinations(range(n), 2):
            if set(hp.terms[i].support) & set(hp.terms[j].support):
                assert colors[i] != colors[j]
        assert max(colors) + 1 <= hm.coloring_bound(hp)


def test_local_matrix_is_reduced_term():
    c = cc.Circuit(3, ((cc.H(0),), (cc.CZ(0, 1),)))
    hp = hm.build_parent(c)
    t = hp.terms[0]
    assert np.allclose(t.local, partial_trace(t.dense, t.support, 3) / 2 ** (3 - len(t.support)))
