import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbsiqp import core


X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense_label(label):
    out = np.ones((1, 1), dtype=complex)
    for c in label:
        out = np.kron(out, LETTERS[c])
    return out


def bell():
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return np.outer(psi, psi.conj())


labels = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n),
    st.integers(0, 3), st.integers(0, 3)))


def test_pauli_to_matrix_z():
    assert np.allclose(core.pauli_to_matrix(core.PauliString.from_label("Z")), np.diag([1, -1]))


def test_pauli_to_matrix_xi_swaps_blocks():
    m = core.pauli_to_matrix(core.PauliString.from_label("XI"))
    assert np.array_equal(m[:2, 2:], np.eye(2)) and np.array_equal(m[2:, :2], np.eye(2))
    assert not m[:2, :2].any()


def test_random_pauli_involutory():
    rng = np.random.default_rng(0)
    for _ in range(20):
        label = "".join(rng.choice(list("IXYZ"), 3))
        m = core.pauli_to_matrix(core.PauliString.from_label(label))
        assert np.allclose(m @ m, np.eye(8))


def test_label_round_trip_and_support():
    p = core.PauliString.from_label("XIYZ")
    assert p.label == "XIYZ"
    assert p.support == (0, 2, 3)
    assert p.weight == 3


@given(labels)
@settings(max_examples=200, deadline=None)
def test_product_matches_matrices(data):
    a, b, pa, pb = data
    p = core.PauliString.from_label(a, pa)
    q = core.PauliString.from_label(b, pb)
    lhs = (1j ** pa) * dense_label(a) @ ((1j ** pb) * dense_label(b))
    assert np.allclose(core.pauli_to_matrix(p * q), lhs)


def test_products_exhaustive_two_qubits():
    for p, q in itertools.product(core.all_paulis(2), repeat=2):
        expect = dense_label(p.label) @ dense_label(q.label)
        assert np.allclose(core.pauli_to_matrix(core.pauli_product(p, q)), expect)


def test_basis_stack_order():
    stack = core.pauli_basis_matrices(2)
    for idx, p in enumerate(core.all_paulis(2)):
        assert np.allclose(stack[idx], dense_label(p.label))


def test_partial_trace_bell():
    assert np.allclose(core.partial_trace(bell(), [0]), I2 / 2)


def test_partial_trace_product():
    rng = np.random.default_rng(1)
    a = core.random_density_matrix(1, rng)
    b = core.random_density_matrix(2, rng)
    assert np.allclose(core.partial_trace(np.kron(a, b), [0]), a)
    assert np.allclose(core.partial_trace(np.kron(a, b), [1, 2]), b)


def test_partial_trace_empty_keep_is_trace():
    rho = core.random_density_matrix(2, np.random.default_rng(2))
    assert core.partial_trace(rho, []).shape == (1, 1)
    assert abs(core.partial_trace(rho, [])[0, 0] - 1) < 1e-12


def test_partial_trace_rejects_bad_qubits():
    with pytest.raises(ValueError):
        core.partial_trace(np.eye(4) / 4, [2])


@given(st.integers(0, 2 ** 32 - 1), st.permutations([0, 1, 2, 3]))
@settings(max_examples=40, deadline=None)
def test_partial_trace_order_independent(seed, order):
    rho = core.random_density_matrix(4, np.random.default_rng(seed))
    keep = sorted(order[:2])
    stepwise = rho
    alive = [0, 1, 2, 3]
    for q in order[2:]:
        alive_next = [a for a in alive if a != q]
        stepwise = core.partial_trace(stepwise, [alive.index(a) for a in alive_next], len(alive))
        alive = alive_next
    assert np.allclose(stepwise, core.partial_trace(rho, keep))


def test_embed_matches_kron():
    a = core.random_density_matrix(1, np.random.default_rng(3))
    assert np.allclose(core.embed(a, [1], 3), np.kron(np.kron(I2, a), I2))
    cnot = np.eye(4)[[0, 1, 3, 2]]
    swapped = core.embed(cnot, [1, 0], 2)
    # control on qubit 1, target qubit 0
    assert np.allclose(swapped @ np.array([0, 1, 0, 0]), [0, 0, 0, 1])


def test_divergences_identical():
    rho = core.random_density_matrix(2, np.random.default_rng(4))
    d = core.divergences(rho, rho)
    assert abs(d.trace_distance) < 1e-12
    assert abs(d.relative_entropy) < 1e-10
    assert abs(d.fidelity - 1) < 1e-8


def test_divergences_orthogonal_and_ln2():
    zero = np.diag([1.0, 0]).astype(complex)
    one = np.diag([0, 1.0]).astype(complex)
    assert abs(core.trace_distance(zero, one) - 1) < 1e-12
    assert abs(core.relative_entropy(zero, I2 / 2) - math.log(2)) < 1e-12
    assert core.relative_entropy(zero, one) == math.inf


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50, deadline=None)
def test_triangle_and_pinsker(seed):
    rng = np.random.default_rng(seed)
    r, s, t = (core.random_density_matrix(2, rng) for _ in range(3))
    assert core.trace_distance(r, t) <= core.trace_distance(r, s) + core.trace_distance(s, t) + 1e-10
    d = core.divergences(r, s)
    assert d.trace_distance <= math.sqrt(d.relative_entropy / 2) + 1e-10
    assert 0 <= d.fidelity <= 1


def test_hermitize_rejects_non_hermitian():
    with pytest.raises(ValueError):
        core.hermitize(np.array([[0, 1], [0, 0]]))


def test_herm_functions():
    rho = core.random_density_matrix(2, np.random.default_rng(5))
    s = core.herm_sqrt(rho)
    assert np.allclose(s @ s, rho)
    assert np.allclose(core.herm_expm(core.herm_log(core.regularize(rho))), core.regularize(rho))


def test_vec_convention():
    rng = np.random.default_rng(6)
    a, b, x = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(core.apply_superop(core.sandwich(a, b), x), a @ x @ b)
    assert np.allclose(core.unvec(core.vec(x)), x)


def test_cptp_identity_channel():
    rep = core.cptp_check(np.eye(4, dtype=complex))
    assert rep.is_cp and rep.is_tp
    assert abs(rep.min_choi_eig) < 1e-12
    eig = np.linalg.eigvalsh(core.choi_matrix(np.eye(4, dtype=complex)))
    assert np.allclose(sorted(eig), [0, 0, 0, 2])


def test_cptp_transpose_not_cp():
    swap = np.eye(4)[[0, 2, 1, 3]].astype(complex)
    rep = core.cptp_check(swap)
    assert rep.is_tp and not rep.is_cp
    assert abs(rep.min_choi_eig + 1) < 1e-12


def test_cptp_kraus_channel():
    p = 0.3
    s = core.kraus_to_superop([math.sqrt(1 - p) * I2, math.sqrt(p) * Z])
    rep = core.cptp_check(s)
    assert rep.is_cp and rep.is_tp


def test_density_matrix_tools():
    rng = np.random.default_rng(7)
    rho = core.random_density_matrix(3, rng, rank=2)
    assert core.is_density_matrix(rho)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 2
    psi = core.random_pure_state(2, rng)
    assert abs(core.von_neumann_entropy(psi)) < 1e-10
    assert abs(core.von_neumann_entropy(np.eye(8) / 8) - 3 * math.log(2)) < 1e-12


def test_bits_index_round_trip():
    for idx in range(16):
        assert core.bits_to_index(core.index_to_bits(idx, 4)) == idx
    assert list(core.hamming_weights(2)) == [0, 1, 1, 2]
    assert np.allclose(core.basis_state([1, 0]), np.eye(4)[2])
