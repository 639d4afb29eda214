"""Markov structure of Gibbs states: CMI, shielding, Petz recovery and
local indistinguishability on lattices."""

from collections import deque
from dataclasses import dataclass
import math

import numpy as np

from .circuit import Circuit, Gate, build_unitary, lightcone_gate_positions, lightcones
from .core import (embed, herm_expm, herm_sqrt, hermitize, partial_trace,
                   trace_distance, von_neumann_entropy)
from .hamiltonian import build_parent


def line_lattice(n):
    return [(i, i + 1) for i in range(n - 1)]


def grid_lattice(width, height):
    edges = []
    for y in range(height):
        for x in range(width):
            q = y * width + x
            if x + 1 < width:
                edges.append((q, q + 1))
            if y + 1 < height:
                edges.append((q, q + width))
    return edges


def graph_distances(edges, sources, n):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = [math.inf] * n
    dq = deque()
    for s in sources:
        dist[s] = 0
        dq.append(s)
    while dq:
        u = dq.popleft()
        for v in adj[u]:
            if dist[v] == math.inf:
                dist[v] = dist[u] + 1
                dq.append(v)
    return dist


@dataclass(frozen=True)
class Tripartition:
    A: frozenset
    B: frozenset
    C: frozenset
    edges: tuple = None

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, frozenset(int(q) for q in getattr(self, name)))
        if self.A & self.B or self.B & self.C or self.A & self.C:
            raise ValueError("A, B, C must be disjoint")
        if self.edges is not None:
            object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @property
    def X(self):
        return self.A | self.B | self.C

    def distance(self, n=None):
        if self.edges is None:
            raise ValueError("geometry missing")
        if n is None:
            n = 1 + max([max(e) for e in self.edges] + list(self.X))
        dist = graph_distances(self.edges, self.A, n)
        return min(dist[c] for c in self.C) if self.C else math.inf

    def as_json(self):
        return {"A": sorted(self.A), "B": sorted(self.B), "C": sorted(self.C)}


def _entropy(rho, keep, n):
    return von_neumann_entropy(partial_trace(rho, keep, n)) if keep else 0.0


def cmi(rho, t):
    """I(A:C|B) in nats."""
    n = int(round(math.log2(rho.shape[0])))
    A, B, C = t.A, t.B, t.C
    return (_entropy(rho, A | B, n) + _entropy(rho, B | C, n)
            - _entropy(rho, A | B | C, n) - _entropy(rho, B, n))


def is_shielding(hp, t):
    """True iff every path through interaction hyperedges from A to C meets B."""
    edges = [set(term.support) for term in hp.terms]
    seen = set(t.A)
    dq = deque(t.A)
    while dq:
        u = dq.popleft()
        for e in edges:
            if u in e:
                for v in e:
                    if v in t.B or v in seen:
                        continue
                    if v in t.C:
                        return False
                    seen.add(v)
                    dq.append(v)
    return True


def _pinv_power(a, power, rel_cut=1e-12):
    w, v = np.linalg.eigh(hermitize(a))
    cut = rel_cut * max(abs(w).max(), 1e-300)
    f = np.where(w > cut, np.abs(w) ** power, 0.0)
    return (v * f) @ v.conj().T


def _positions(sub, order):
    return [order.index(q) for q in sorted(sub)]


def petz_recover(rho, t):
    """(I_A (x) R_{B->BC})(rho_AB) on the sorted qubits of A u B u C."""
    n = int(round(math.log2(rho.shape[0])))
    order = sorted(t.X)
    m = len(order)
    rho_x = partial_trace(rho, order, n)
    ab = sorted(t.A | t.B)
    bc = sorted(t.B | t.C)
    rho_ab = partial_trace(rho_x, _positions(ab, order), m)
    rho_b = partial_trace(rho_x, _positions(t.B, order), m)
    rho_bc = partial_trace(rho_x, _positions(bc, order), m)
    inv_b = embed(_pinv_power(rho_b, -0.5), _positions(t.B, ab), len(ab))
    inner = embed(inv_b @ rho_ab @ inv_b, _positions(ab, order), m)
    outer = embed(herm_sqrt(rho_bc), _positions(bc, order), m)
    out = outer @ inner @ outer
    return 0.5 * (out + out.conj().T)


def petz_residual(rho, t):
    n = int(round(math.log2(rho.shape[0])))
    return trace_distance(petz_recover(rho, t), partial_trace(rho, sorted(t.X), n))


@dataclass(frozen=True)
class FawziRenner:
    cmi_bits: float
    bound_bits: float

    @property
    def holds(self):
        return self.cmi_bits >= self.bound_bits - 1e-12


def fawzi_renner(rho, t):
    """I(A:C|B) versus ||rho - recovered||_1^2 / (4 ln 2), both in bits."""
    x = 2 * petz_residual(rho, t)
    return FawziRenner(cmi(rho, t) / math.log(2), x * x / (4 * math.log(2)))


# -------------------------------------------------- local indistinguishability

def subsystem_hamiltonian(hp, region):
    """Sum of the terms whose support lies inside ``region``, on sorted(region)."""
    order = sorted(region)
    h = np.zeros((2 ** len(order),) * 2, dtype=complex)
    for term in hp.terms:
        if set(term.support) <= set(region):
            h += embed(term.local, _positions(term.support, order), len(order))
    return h


def subsystem_gibbs(hp, region, beta):
    g = herm_expm(-beta * subsystem_hamiltonian(hp, region))
    return g / np.trace(g).real


def check_geometry(c, edges):
    if edges is None:
        raise ValueError("geometry missing")
    allowed = {frozenset(e) for e in edges}
    for g in c.gates:
        if len(g.qubits) > 2 or (len(g.qubits) == 2 and frozenset(g.qubits) not in allowed):
            raise ValueError("gate %s is not nearest neighbour on the lattice" % (g,))


@dataclass(frozen=True)
class LIReport:
    residual: float
    witness_residual: float
    distance: float
    depth: int
    condition_met: bool


def decoupling_unitary(c, B):
    """Gates of every lightcone contained in B, in circuit order."""
    lcs = lightcones(c)
    picked = set()
    for k in range(c.n):
        if lcs[k] <= set(B):
            picked |= set(lightcone_gate_positions(c, k))
    return [g for j, g in enumerate(c.gates) if j in picked]


def local_indistinguishability_check(c, t, beta):
    check_geometry(c, t.edges)
    hp = build_parent(c)
    X = sorted(t.X)
    rho_x = subsystem_gibbs(hp, X, beta)
    red_x = partial_trace(rho_x, _positions(t.A, X), len(X))
    AB = sorted(t.A | t.B)
    rho_ab = subsystem_gibbs(hp, AB, beta)
    red_ab = partial_trace(rho_ab, _positions(t.A, AB), len(AB))
    residual = trace_distance(red_x, red_ab)

    d = c.two_qubit_depth
    dist_a = graph_distances(t.edges, t.A, c.n)
    side = sorted(t.A | {b for b in t.B if dist_a[b] <= d})
    gates = decoupling_unitary(c, t.B)
    local = [Gate(g.kind, tuple(X.index(q) for q in g.qubits), g.param) for g in gates]
    u = build_unitary(Circuit(len(X), tuple((g,) for g in local)))
    rot = u.conj().T @ rho_x @ u
    p1 = _positions(side, X)
    p2 = [j for j in range(len(X)) if j not in p1]
    r1 = partial_trace(rot, p1, len(X))
    r2 = partial_trace(rot, p2, len(X))
    prod = embed(np.kron(r1, r2), p1 + p2, len(X))
    witness = trace_distance(rot, prod)
    dist = t.distance(c.n)
    return LIReport(residual, witness, dist, d, dist >= 4 * d + 1)
