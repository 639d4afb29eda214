"""Parent Hamiltonians of circuits in projector form."""

from dataclasses import dataclass
import math

import numpy as np

from .circuit import Circuit, build_unitary, lightcone_gates, supports
from .core import CapacityError, embed, hamming_weights, herm_expm, partial_trace

MAX_PARENT_QUBITS = 12


@dataclass(frozen=True)
class Term:
    index: int
    support: tuple
    local: np.ndarray
    dense: np.ndarray


@dataclass(frozen=True)
class ParentHamiltonian:
    """H = sum_i C (|1><1|_i (x) I) C^dagger with integer spectrum 0..n.

    ``unitary`` holds the eigenbasis: column x of it is C|x>, an
    eigenvector of energy |x|.
    """

    circuit: object
    unitary: np.ndarray
    terms: tuple
    lightcones: tuple
    z_supports: tuple
    ell: int
    r: int
    H: np.ndarray

    @property
    def n(self):
        return self.circuit.n

    @property
    def energies(self):
        return hamming_weights(self.n)

    def lightcone_unitary(self, i):
        """Product of the gates inside the lightcone of wire i, on all n qubits."""
        gates = lightcone_gates(self.circuit, i)
        return build_unitary(Circuit(self.n, tuple((g,) for g in gates)))


def build_parent(c):
    if c.n > MAX_PARENT_QUBITS:
        raise CapacityError("parent Hamiltonian supports n <= %d" % MAX_PARENT_QUBITS)
    n = c.n
    u = build_unitary(c)
    sup = supports(c)
    idx = np.arange(2 ** n)
    terms = []
    for i in range(n):
        bit = ((idx >> (n - 1 - i)) & 1).astype(float)
        h = (u * bit) @ u.conj().T
        s = tuple(sorted(sup.z_support[i]))
        local = partial_trace(h, s, n) / 2 ** (n - len(s))
        terms.append(Term(i, s, local, h))
    H = (u * hamming_weights(n)) @ u.conj().T
    return ParentHamiltonian(c, u, tuple(terms), sup.lightcone, sup.z_support,
                             sup.ell, sup.r, H)


def eigenprojector(hp, k):
    if k < 0 or k > hp.n:
        raise ValueError("k must lie in [0, n]")
    sel = (hp.energies == k).astype(float)
    return (hp.unitary * sel) @ hp.unitary.conj().T


def gibbs_state(hp, beta):
    """Return (rho_beta, Z) computed from the dense H."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    g = herm_expm(-beta * hp.H)
    z = float(np.trace(g).real)
    return g / z, z


def partition_function(n, beta):
    return (1 + math.exp(-beta)) ** n


def local_term_matrix(hp, i, qubits):
    """Term i embedded into the ordered qubit list ``qubits`` (must contain S_i)."""
    t = hp.terms[i]
    pos = [list(qubits).index(q) for q in t.support]
    return embed(t.local, pos, len(qubits))


def color_interactions(hp):
    """Greedy lowest-available colouring of the term-overlap graph."""
    sup = [set(t.support) for t in hp.terms]
    colors = []
    for i, s in enumerate(sup):
        taken = {colors[j] for j in range(i) if sup[j] & s}
        c = 0
        while c in taken:
            c += 1
        colors.append(c)
    return colors


def coloring_bound(hp):
    return hp.ell * 2 ** hp.circuit.depth + 1
