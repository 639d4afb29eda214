"""Repetition-code protection of IQP programs against input and output flips."""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .circuit import (CNOT, H, MZROT, ZROT, Circuit, is_iqp_shaped,
                      output_distribution, schedule)
from .noise import (StructureError, combined_rate, empirical_distribution,
                    sample_noisy_iqp, tvd, tvd_stderr)


@dataclass(frozen=True)
class IQPProgram:
    """exp(i phase) * exp(i sum_j theta_j Z^{M_j}) sandwiched by Hadamards."""

    n: int
    M: np.ndarray
    theta: np.ndarray
    phase: float = 0.0

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.uint8).reshape(-1, self.n)
        th = np.asarray(self.theta, dtype=float).reshape(-1)
        if len(th) != len(M):
            raise ValueError("one angle per row")
        if len(M) and (M.sum(axis=1) == 0).any():
            raise ValueError("all-zero rows are not allowed")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "theta", th)

    def diagonal(self):
        """Diagonal of D over basis states x (qubit 0 most significant)."""
        idx = np.arange(2 ** self.n)
        bits = (idx[:, None] >> np.arange(self.n - 1, -1, -1)) & 1
        parity = (bits @ self.M.T.astype(np.int64)) % 2
        return np.exp(1j * self.phase) * np.exp(1j * ((1 - 2 * parity) * self.theta).sum(axis=1))


def iqp_to_program(c):
    if not is_iqp_shaped(c):
        raise StructureError("circuit is not H / diagonal / H shaped")
    n = c.n
    rows, angles = [], []
    phase = 0.0

    def row(qs):
        r = np.zeros(n, dtype=np.uint8)
        r[list(qs)] = 1
        return r

    for layer in c.layers[1:-1]:
        for g in layer:
            if g.kind == "TPOW":
                # T^k = e^{i pi k/8} exp(-i pi k/8 Z)
                rows.append(row(g.qubits))
                angles.append(-np.pi * g.param / 8)
                phase += np.pi * g.param / 8
            elif g.kind in ("ZROT", "MZROT"):
                rows.append(row(g.qubits))
                angles.append(g.param)
            elif g.kind == "CZ":
                a, b = g.qubits
                rows += [row([a]), row([b]), row([a, b])]
                angles += [np.pi / 4, np.pi / 4, -np.pi / 4]
                phase -= np.pi / 4
    M = np.array(rows, dtype=np.uint8).reshape(-1, n)
    return IQPProgram(n, M, np.array(angles), phase)


def program_to_circuit(prog, decompose=False):
    """H layer, one (multi-)Z rotation per row, H layer. The global phase is dropped."""
    n = prog.n
    gates = []
    for r, th in zip(prog.M, prog.theta):
        qs = [int(q) for q in np.flatnonzero(r)]
        if len(qs) == 1:
            gates.append(ZROT(qs[0], th))
        elif decompose:
            gates.extend(_multiz_gates(qs, th))
        else:
            gates.append(MZROT(th, qs))
    core = schedule(n, gates)
    hl = (tuple(H(q) for q in range(n)),)
    return Circuit(n, hl + core.layers + hl)


def generator_matrix(n, r):
    G = np.zeros((n * r, n), dtype=np.uint8)
    for i in range(n):
        G[i * r:(i + 1) * r, i] = 1
    return G


def encode_program(prog, r):
    if r < 1:
        raise ValueError("r must be positive")
    G = generator_matrix(prog.n, r)
    M = (prog.M.astype(np.int64) @ G.T.astype(np.int64)) % 2
    return IQPProgram(prog.n * r, M, prog.theta.copy(), prog.phase)


def _parity_layers(qs):
    """CNOT matching layers that accumulate the parity of qs into qs[0]."""
    layers = []
    stride = 1
    while stride < len(qs):
        layer = [CNOT(qs[j + stride], qs[j]) for j in range(0, len(qs) - stride, 2 * stride)]
        layers.append(layer)
        stride *= 2
    return layers


def _multiz_gates(qs, theta):
    layers = _parity_layers(qs)
    fwd = [g for layer in layers for g in layer]
    return fwd + [ZROT(qs[0], theta)] + fwd[::-1]


def decompose_multiz(k, theta):
    """exp(i theta Z^{(x)k}) as parity CNOT layers, one ZROT, and their inverse."""
    if k < 1:
        raise ValueError("k must be positive")
    qs = list(range(k))
    layers = _parity_layers(qs)
    out = [tuple(layer) for layer in layers] + [(ZROT(0, theta),)]
    out += [tuple(layer) for layer in reversed(layers)]
    return Circuit(k, tuple(out))


def block_decode(y, r):
    if r % 2 == 0:
        raise ValueError("r must be odd")
    y = np.asarray(y, dtype=np.uint8)
    single = y.ndim == 1
    y2 = np.ascontiguousarray(y.reshape(1, -1) if single else y)
    if y2.shape[1] % r:
        raise ValueError("length must be a multiple of r")
    out = _kernels.block_majority(y2, r)
    return out[0] if single else out


def repcode_bound(n, q, r):
    return n * (4 * q * (1 - q)) ** (r / 2)


def majority_tail(r, q):
    return sum(math.comb(r, j) * q ** j * (1 - q) ** (r - j) for j in range(r // 2 + 1, r + 1))


@dataclass(frozen=True)
class RepcodeResult:
    n: int
    r: int
    p_in: float
    p_out: float
    q: float
    bound: float
    measured_tvd: float
    stderr: float
    samples: int
    encoded_depth: int


def repcode_pipeline(base, r, p_in, p_out, seed, count):
    if base.n > 4:
        raise ValueError("base circuit limited to n <= 4")
    if r % 2 == 0:
        raise ValueError("r must be odd")
    prog = iqp_to_program(base)
    enc = encode_program(prog, r)
    circ = program_to_circuit(enc)
    samples = sample_noisy_iqp(circ, p_in, seed, count, p_out=p_out)
    decoded = block_decode(samples, r)
    ideal = output_distribution(base)
    q = combined_rate(p_in, p_out)
    rendered = program_to_circuit(enc, decompose=True)
    return RepcodeResult(base.n, r, p_in, p_out, q, repcode_bound(base.n, q, r),
                         tvd(empirical_distribution(decoded), ideal),
                         tvd_stderr(ideal, count), count, rendered.depth)
