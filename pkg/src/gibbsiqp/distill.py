"""B-ary CNOT-tree distillation gadgets and their majority decoder."""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from . import _kernels
from .circuit import CNOT, Circuit, Gate, is_iqp_shaped, output_distribution
from .noise import (StructureError, beta_to_p, chunk_rng, empirical_distribution,
                    sample_noisy_iqp, tvd, tvd_stderr, _chunks)

MAX_NODES = 10 ** 6


@dataclass(frozen=True)
class BTreeGadget:
    """Complete B-ary tree with D node levels; node 0 is the root.

    Nodes are numbered breadth first. ``cnot_schedule`` lists the
    (parent, child) CNOTs in time order: the level just above the leaves
    first, the root's children last, children of one parent in
    increasing index.
    """

    B: int
    D: int
    k: int
    parent: np.ndarray
    children: tuple
    depth_of: np.ndarray
    cnot_schedule: tuple

    @property
    def root(self):
        return 0

    @property
    def sched_parent(self):
        return np.array([p for p, _ in self.cnot_schedule], dtype=np.int64)

    @property
    def sched_child(self):
        return np.array([c for _, c in self.cnot_schedule], dtype=np.int64)

    @property
    def leaves(self):
        return [u for u in range(self.k) if self.depth_of[u] == self.D - 1]

    @property
    def decode_order(self):
        """Internal nodes from deepest to the root."""
        inner = [u for u in range(self.k) if self.children[u]]
        return np.array(sorted(inner, key=lambda u: (-self.depth_of[u], u)), dtype=np.int64)

    @property
    def child_csr(self):
        ptr = [0]
        idx = []
        for kids in self.children:
            idx.extend(kids)
            ptr.append(len(idx))
        return np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64)

    def layers(self, offset=0):
        out = []
        for d in range(self.D - 2, -1, -1):
            parents = [u for u in range(self.k) if self.depth_of[u] == d]
            for j in range(self.B):
                out.append(tuple(CNOT(p + offset, self.children[p][j] + offset) for p in parents))
        return out

    def circuit(self):
        return Circuit(self.k, tuple(self.layers()))


def gadget_size(B, D):
    return sum(B ** j for j in range(D))


def build_gadget(B, D):
    if B < 2 or D < 2:
        raise ValueError("need B >= 2 and D >= 2")
    if B % 2 == 0:
        raise ValueError("even B has no majority tie rule; use odd B")
    k = gadget_size(B, D)
    if k > MAX_NODES:
        raise ValueError("gadget has %d nodes (limit %d)" % (k, MAX_NODES))
    parent = np.full(k, -1, dtype=np.int64)
    depth = np.zeros(k, dtype=np.int64)
    children = [[] for _ in range(k)]
    offsets = [gadget_size(B, j) for j in range(D + 1)]
    for d in range(D - 1):
        for m in range(B ** d):
            u = offsets[d] + m
            for c in range(B):
                v = offsets[d + 1] + m * B + c
                parent[v] = u
                depth[v] = d + 1
                children[u].append(v)
    sched = []
    for d in range(D - 2, -1, -1):
        parents = range(offsets[d], offsets[d + 1])
        for j in range(B):
            sched.extend((p, children[p][j]) for p in parents)
    return BTreeGadget(B, D, k, parent, tuple(tuple(c) for c in children), depth, tuple(sched))


def encode_bits(g, s):
    s = np.asarray(s, dtype=np.uint8)
    if s.shape != (g.k,):
        raise ValueError("expected %d bits" % g.k)
    out = s.copy().reshape(1, -1)
    _kernels.tree_encode(out, g.sched_parent, g.sched_child)
    return out[0]


def decode_batch(g, meas):
    """Root-noise guesses for rows of measured gadget bits (root column ignored)."""
    ptr, idx = g.child_csr
    meas = np.ascontiguousarray(meas, dtype=np.uint8)
    return _kernels.tree_decode(meas, g.decode_order, ptr, idx, 0)


def decode(g, measured):
    measured = np.asarray(measured, dtype=np.uint8)
    if measured.shape != (g.k - 1,):
        raise ValueError("expected %d measured bits" % (g.k - 1))
    full = np.concatenate([[0], measured]).astype(np.uint8).reshape(1, -1)
    return int(decode_batch(g, full)[0])


def majority_failure(B, x):
    """P[Binomial(B, x) > B/2]."""
    return sum(math.comb(B, j) * x ** j * (1 - x) ** (B - j) for j in range(B // 2 + 1, B + 1))


def failure_chain(B, D, p):
    chain = [p]
    for _ in range(D - 1):
        chain.append(majority_failure(B, chain[-1]))
    return chain


def exact_failure_rate(B, D, p):
    if B % 2 == 0:
        raise ValueError("B must be odd")
    return failure_chain(B, D, p)[-1]


def enumerate_failure_rate(B, D, p):
    """Brute force over every noise vector of the whole tree."""
    g = build_gadget(B, D)
    if g.k > 20:
        raise ValueError("enumeration limited to k <= 20")
    allbits = np.array(list(itertools.product([0, 1], repeat=g.k)), dtype=np.uint8)
    weights = np.prod(np.where(allbits == 1, p, 1 - p), axis=1)
    enc = allbits.copy()
    _kernels.tree_encode(enc, g.sched_parent, g.sched_child)
    guess = decode_batch(g, enc)
    return float(weights[guess != allbits[:, 0]].sum())


@dataclass(frozen=True)
class MCResult:
    estimate: float
    stderr: float
    trials: int


def mc_failure_rate(B, D, p, trials, seed):
    g = build_gadget(B, D)
    fails = 0
    for j, _, m in _chunks(trials):
        rng = chunk_rng(seed, j)
        s = (rng.random((m, g.k)) < p).astype(np.uint8)
        root = s[:, 0].copy()
        _kernels.tree_encode(s, g.sched_parent, g.sched_child)
        fails += int((decode_batch(g, s) != root).sum())
    f = fails / trials
    return MCResult(f, math.sqrt(f * (1 - f) / trials), trials)


def sweep(Bs, Ds, ps, trials, seed):
    rows = []
    for B in Bs:
        for D in Ds:
            for p in ps:
                mc = mc_failure_rate(B, D, p, trials, seed)
                rows.append({"B": B, "D": D, "p": p, "exact_rate": exact_failure_rate(B, D, p),
                             "mc_rate": mc.estimate, "stderr": mc.stderr, "trials": trials})
    return rows


@dataclass(frozen=True)
class FTCircuit:
    base: Circuit
    gadget: BTreeGadget

    @property
    def n(self):
        return self.base.n

    @property
    def k(self):
        return self.gadget.k

    @property
    def total_bits(self):
        return self.n * self.k

    @property
    def gadgets(self):
        return [self.gadget] * self.n

    @property
    def root_map(self):
        """Base input wire -> bit index of the matching gadget root."""
        return {w: w * self.k for w in range(self.n)}

    def render(self):
        """Whole circuit on n*k qubits: gadgets in parallel, then the remapped base."""
        k = self.k
        layers = []
        for layer in self.gadget.layers():
            layers.append(tuple(CNOT(g.qubits[0] + w * k, g.qubits[1] + w * k)
                                for w in range(self.n) for g in layer))
        for layer in self.base.layers:
            layers.append(tuple(Gate(g.kind, tuple(q * k for q in g.qubits), g.param)
                                for g in layer))
        return Circuit(self.n * k, tuple(layers))


def assemble_ft_circuit(base, B, D):
    if not is_iqp_shaped(base):
        raise StructureError("base circuit must be H / diagonal / H shaped")
    return FTCircuit(base, build_gadget(B, D))


@dataclass(frozen=True)
class FTResult:
    corrected: np.ndarray
    tvd: float
    failure_bound: float
    stderr: float
    p: float


def correct_samples(ft, samples):
    n, k = ft.n, ft.k
    count = samples.shape[0]
    guesses = decode_batch(ft.gadget, samples.reshape(count * n, k)).reshape(count, n)
    return samples[:, np.arange(n) * k] ^ guesses


def ft_pipeline(ft, beta, seed, count):
    if ft.n > 6:
        raise ValueError("exact ideal distribution limited to n <= 6")
    p = beta_to_p(beta)
    samples = sample_noisy_iqp(ft, p, seed, count)
    corrected = correct_samples(ft, samples)
    ideal = output_distribution(ft.base)
    dist = tvd(empirical_distribution(corrected), ideal)
    bound = ft.n * exact_failure_rate(ft.gadget.B, ft.gadget.D, p)
    return FTResult(corrected, dist, bound, tvd_stderr(ideal, count), p)
