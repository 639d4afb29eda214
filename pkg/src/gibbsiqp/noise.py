"""Bit-flip noise, the temperature dictionary and noisy IQP sampling."""

from dataclasses import dataclass
import json
import math

import numpy as np

from . import _kernels
from .circuit import (Circuit, build_unitary, circuit_hash, is_iqp_shaped,
                      output_distribution, sample_table, indices_to_bits)
from .core import CapacityError, kraus_to_superop, trace_distance
from .hamiltonian import build_parent, gibbs_state

CHUNK = 1 << 16


class StructureError(ValueError):
    """Circuit does not have the shape a routine requires."""


@dataclass(frozen=True)
class NoiseSpec:
    p_in: float
    p_out: float = 0.0

    def __post_init__(self):
        for v in (self.p_in, self.p_out):
            if not 0 <= v < 0.5:
                raise ValueError("noise rates must lie in [0, 1/2)")

    @property
    def q(self):
        return combined_rate(self.p_in, self.p_out)


def beta_to_p(beta):
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if math.isinf(beta):
        return 0.0
    return 1.0 / (1.0 + math.exp(beta))


def p_to_beta(p):
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2] for a non-negative temperature")
    if p == 0:
        return math.inf
    return math.log(1.0 / p - 1.0)


def combined_rate(p_in, p_out):
    return p_in * (1 - p_out) + p_out * (1 - p_in)


def bitflip_superop(p):
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return kraus_to_superop([math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * x])


def bitflip(rho, p):
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return (1 - p) * rho + p * x @ rho @ x


def noisy_input(n, p):
    single = np.diag([1 - p, p]).astype(complex)
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, single)
    return out


def noisy_output_state(c, p):
    if c.n > 10:
        raise CapacityError("noisy_output_state supports n <= 10")
    u = build_unitary(c)
    return u @ noisy_input(c.n, p) @ u.conj().T


def gibbs_equivalence_check(c, beta):
    rho, _ = gibbs_state(build_parent(c), beta)
    return trace_distance(rho, noisy_output_state(c, beta_to_p(beta)))


def shifted_distribution(probs, mask_index):
    """x -> p(x xor r) for a mask given as a basis index."""
    idx = np.arange(len(probs))
    return probs[idx ^ mask_index]


def _chunks(count):
    start = 0
    j = 0
    while start < count:
        m = min(CHUNK, count - start)
        yield j, start, m
        start += m
        j += 1


def chunk_rng(seed, j):
    """Stream for chunk j; fixed by (seed, j) regardless of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def sample_noisy_iqp(ft, p, seed, count, p_out=0.0):
    """Samples of an IQP circuit (optionally behind distillation gadgets) under
    input flips at rate p and measurement flips at rate p_out.

    ``ft`` is either a plain IQP Circuit or an FTCircuit. The result is a
    (count, n*k) uint8 array laid out gadget by gadget; column g*k holds
    the measured root wire of gadget g and the rest are its ancillas.
    """
    if isinstance(ft, Circuit):
        base, gadget = ft, None
    else:
        base, gadget = ft.base, ft.gadget
    if not is_iqp_shaped(base):
        raise StructureError("core circuit is not H / diagonal / H shaped")
    n = base.n
    k = 1 if gadget is None else gadget.k
    probs = output_distribution(base)
    out = np.empty((count, n * k), dtype=np.uint8)
    roots = np.arange(n) * k
    for j, start, m in _chunks(count):
        rng = chunk_rng(seed, j)
        noise = (rng.random((m, n * k)) < p).astype(np.uint8)
        if gadget is not None:
            flat = np.ascontiguousarray(noise.reshape(m * n, k))
            _kernels.tree_encode(flat, gadget.sched_parent, gadget.sched_child)
            noise = flat.reshape(m, n * k)
        ideal = indices_to_bits(sample_table_rng(probs, rng, m), n)
        noise[:, roots] ^= ideal
        if p_out > 0:
            noise ^= (rng.random((m, n * k)) < p_out).astype(np.uint8)
        out[start:start + m] = noise
    return out


def sample_table_rng(probs, rng, count):
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, rng.random(count), side="right"), len(probs) - 1)


def empirical_distribution(bits):
    idx = _kernels.bits_to_indices(np.ascontiguousarray(bits, dtype=np.uint8))
    return np.bincount(idx, minlength=2 ** bits.shape[1]) / len(bits)


def tvd(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def tvd_stderr(probs, count):
    """Scale of the sampling fluctuation of the TVD: 1/2 sum sqrt(p(1-p)/N)."""
    probs = np.asarray(probs)
    return 0.5 * float(np.sqrt(probs * (1 - probs) / count).sum())


def write_samples(path, bits, p_in, p_out, seed, circuit):
    with open(path, "w") as fh:
        for row in bits:
            fh.write("".join("1" if b else "0" for b in row) + "\n")
    meta = {"p_in": p_in, "p_out": p_out, "seed": seed, "count": int(len(bits)),
            "circuit_hash": circuit_hash(circuit)}
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
    return meta


__all__ = ["NoiseSpec", "StructureError", "beta_to_p", "p_to_beta", "combined_rate",
           "bitflip_superop", "bitflip", "noisy_output_state", "gibbs_equivalence_check",
           "shifted_distribution", "sample_noisy_iqp", "empirical_distribution", "tvd",
           "tvd_stderr", "write_samples", "sample_table"]
