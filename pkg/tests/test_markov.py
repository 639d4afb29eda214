import itertools
import math

import numpy as np
import pytest

from gibbsiqp import circuit as cc
from gibbsiqp import core, hamiltonian as hm, markov as mk


T3 = mk.Tripartition({0}, {1}, {2})


def ghz(n):
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return np.outer(psi, psi.conj())


def test_tripartition_validation():
    with pytest.raises(ValueError):
        mk.Tripartition({0}, {0, 1}, {2})
    t = mk.Tripartition([0], [1, 2], [3], mk.line_lattice(4))
    assert t.distance() == 3
    assert t.X == {0, 1, 2, 3}


def test_cmi_product_and_ghz():
    rng = np.random.default_rng(0)
    rhos = [core.random_density_matrix(1, rng) for _ in range(3)]
    prod = np.kron(np.kron(rhos[0], rhos[1]), rhos[2])
    assert abs(mk.cmi(prod, T3)) <= 1e-10
    # pure GHZ: S(AB)=S(BC)=S(B)=ln2, S(ABC)=0, so I(A:C|B) = ln2
    assert abs(mk.cmi(ghz(3), T3) - math.log(2)) <= 1e-10
    # classically correlated GHZ mixture: all four entropies are ln2
    classical = np.diag(np.diag(ghz(3)))
    assert abs(mk.cmi(classical, T3)) <= 1e-10


def test_cmi_nonnegative_random_pure():
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert mk.cmi(core.random_pure_state(3, rng), T3) >= -1e-9


def test_cmi_bell_across_empty_b():
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    rho = np.kron(np.outer(psi, psi.conj()), np.eye(2) / 2)
    t = mk.Tripartition({0}, set(), {1})
    assert abs(mk.cmi(rho, t) - 2 * math.log(2)) <= 1e-10


def test_shielding():
    hp = hm.build_parent(cc.Circuit(4))
    assert mk.is_shielding(hp, mk.Tripartition({0}, set(), {3}))
    depth1 = cc.Circuit(4, ((cc.H(0), cc.H(2)), (cc.CNOT(0, 1), cc.CNOT(2, 3))))
    hp1 = hm.build_parent(depth1)
    assert mk.is_shielding(hp1, mk.Tripartition({0}, {1, 2}, {3}))
    bridge = cc.Circuit(4, ((cc.H(0),), (cc.CNOT(0, 2),), (cc.CNOT(2, 3),)))
    hpb = hm.build_parent(bridge)
    assert not mk.is_shielding(hpb, mk.Tripartition({0}, {1}, {3}))


def test_petz_product_exact():
    rng = np.random.default_rng(2)
    rhos = [core.random_density_matrix(1, rng) for _ in range(3)]
    prod = np.kron(np.kron(rhos[0], rhos[1]), rhos[2])
    assert mk.petz_residual(prod, T3) <= 1e-12


def test_petz_gibbs_shielding():
    c = cc.Circuit(5, (tuple(cc.H(q) for q in range(5)), (cc.CZ(0, 1), cc.CZ(2, 3)),
                       (cc.CZ(1, 2), cc.CZ(3, 4))))
    hp = hm.build_parent(c)
    rho, _ = hm.gibbs_state(hp, 1.0)
    count = 0
    for labels in itertools.product(range(4), repeat=5):
        A = {q for q in range(5) if labels[q] == 1}
        B = {q for q in range(5) if labels[q] == 2}
        C = {q for q in range(5) if labels[q] == 3}
        if not A or not C:
            continue
        t = mk.Tripartition(A, B, C)
        if mk.is_shielding(hp, t):
            count += 1
            assert mk.cmi(rho, t) <= 1e-8
            assert mk.petz_residual(rho, t) <= 1e-7
    assert count > 0


def test_non_shielding_has_correlations():
    c = cc.Circuit(3, ((cc.H(0),), (cc.CNOT(0, 1),), (cc.CNOT(1, 2),)))
    hp = hm.build_parent(c)
    rho, _ = hm.gibbs_state(hp, 2.0)
    t = mk.Tripartition({0}, set(), {2})
    assert not mk.is_shielding(hp, t)
    assert mk.cmi(rho, t) > 1e-3


def test_fawzi_renner_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = core.random_density_matrix(3, rng, int(rng.integers(1, 9)))
        fr = mk.fawzi_renner(rho, T3)
        assert fr.holds


def test_li_identity_circuit():
    lat = mk.line_lattice(4)
    rep = mk.local_indistinguishability_check(cc.Circuit(4), mk.Tripartition({0}, {1}, {2}, lat), 1.0)
    assert rep.depth == 0 and rep.condition_met
    assert rep.residual <= 1e-12


def test_li_brickwork():
    c = cc.Circuit(6, ((cc.H(0), cc.H(2), cc.H(4)), (cc.CNOT(0, 1), cc.CNOT(2, 3), cc.CNOT(4, 5))))
    t = mk.Tripartition({0}, {1, 2, 3, 4}, {5}, mk.line_lattice(6))
    rep = mk.local_indistinguishability_check(c, t, 1.0)
    assert rep.distance == 5 and rep.depth == 1 and rep.condition_met
    assert rep.residual <= 1e-10
    assert rep.witness_residual <= 1e-10


def test_li_requires_geometry():
    c = cc.Circuit(3, ((cc.CNOT(0, 2),),))
    with pytest.raises(ValueError):
        mk.local_indistinguishability_check(c, mk.Tripartition({0}, {1}, {2}, mk.line_lattice(3)), 1.0)
    with pytest.raises(ValueError):
        mk.local_indistinguishability_check(cc.Circuit(3), T3, 1.0)


def test_subsystem_hamiltonian_full_region():
    c = cc.Circuit(3, ((cc.H(0),), (cc.CZ(0, 1),)))
    hp = hm.build_parent(c)
    assert np.allclose(mk.subsystem_hamiltonian(hp, {0, 1, 2}), hp.H)


def test_lattices():
    assert mk.grid_lattice(2, 2) == [(0, 1), (0, 2), (1, 3), (2, 3)]
    d = mk.graph_distances(mk.grid_lattice(3, 2), [0], 6)
    assert d == [0, 1, 2, 1, 2, 3]
