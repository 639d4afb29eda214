"""Dense linear algebra and quantum-information primitives.

Conventions used everywhere in the package:

* qubit 0 is the most significant tensor factor of a state index;
* operators are vectorized by stacking columns, so ``X -> A X B`` becomes
  ``kron(B.T, A)`` acting on ``vec(X)``;
* entropies are in nats.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy.linalg import expm as _expm

HERMITIAN_TOL = 1e-10


class CapacityError(ValueError):
    """Raised when a dense construction would exceed the supported size."""


# ---------------------------------------------------------------- Paulis

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# indexed by (x, z)
_SINGLE = {(0, 0): _I2, (1, 0): _X, (1, 1): _Y, (0, 1): _Z}
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_FROM_LETTER = {v: k for k, v in _LETTER.items()}


@dataclass(frozen=True)
class PauliString:
    """``i**phase_exp`` times a tensor product of I, X, Y, Z.

    ``x_mask`` and ``z_mask`` are tuples of n bits, entry q belonging to
    qubit q. A qubit with both bits set carries Y.
    """

    n: int
    x_mask: tuple
    z_mask: tuple
    phase_exp: int = 0

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x_mask)
        z = tuple(int(b) & 1 for b in self.z_mask)
        if len(x) != self.n or len(z) != self.n:
            raise ValueError("mask length must equal n")
        object.__setattr__(self, "x_mask", x)
        object.__setattr__(self, "z_mask", z)
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)

    @classmethod
    def from_label(cls, label, phase_exp=0):
        bits = [_FROM_LETTER[c] for c in label.upper()]
        return cls(len(bits), [b[0] for b in bits], [b[1] for b in bits], phase_exp)

    @property
    def label(self):
        return "".join(_LETTER[(x, z)] for x, z in zip(self.x_mask, self.z_mask))

    @property
    def support(self):
        return tuple(q for q in range(self.n) if self.x_mask[q] or self.z_mask[q])

    @property
    def weight(self):
        return len(self.support)

    def __mul__(self, other):
        return pauli_product(self, other)


# (a, b) -> power of i picked up by the single-qubit product sigma_a sigma_b
_PRODUCT_PHASE = {}
for _a, _b in itertools.product(_SINGLE, repeat=2):
    _c = (_a[0] ^ _b[0], _a[1] ^ _b[1])
    _ratio = np.trace(_SINGLE[_c].conj().T @ _SINGLE[_a] @ _SINGLE[_b]) / 2
    _PRODUCT_PHASE[(_a, _b)] = int(round(np.angle(_ratio) / (np.pi / 2))) % 4


def pauli_product(p, q):
    """Product ``p @ q`` as a PauliString with the accumulated phase."""
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    phase = p.phase_exp + q.phase_exp
    x, z = [], []
    for k in range(p.n):
        a = (p.x_mask[k], p.z_mask[k])
        b = (q.x_mask[k], q.z_mask[k])
        phase += _PRODUCT_PHASE[(a, b)]
        x.append(a[0] ^ b[0])
        z.append(a[1] ^ b[1])
    return PauliString(p.n, x, z, phase)


def pauli_to_matrix(p):
    out = np.array([[1.0 + 0j]])
    for x, z in zip(p.x_mask, p.z_mask):
        out = np.kron(out, _SINGLE[(x, z)])
    return (1j ** p.phase_exp) * out


def all_paulis(n):
    """All 4**n Pauli strings on n qubits with phase 0, in label order."""
    for letters in itertools.product("IXYZ", repeat=n):
        yield PauliString.from_label("".join(letters))


def pauli_basis_matrices(n):
    """Stack of the 4**n Pauli matrices, shape (4**n, 2**n, 2**n)."""
    if n == 0:
        return np.ones((1, 1, 1), dtype=complex)
    mats = [_I2, _X, _Y, _Z]
    out = np.array(mats)
    for _ in range(n - 1):
        out = np.einsum("aij,bkl->abikjl", out, np.array(mats))
        s = out.shape
        out = out.reshape(s[0] * s[1], s[2] * s[3], s[4] * s[5])
    return out


# ------------------------------------------------------- tensor helpers

def num_qubits(mat):
    d = mat.shape[0]
    n = int(round(math.log2(d))) if d > 0 else 0
    if 2 ** n != d:
        raise ValueError("dimension %d is not a power of two" % d)
    return n


def basis_state(bits):
    """Column vector |bits> with qubit 0 most significant."""
    n = len(bits)
    v = np.zeros(2 ** n, dtype=complex)
    v[bits_to_index(bits)] = 1.0
    return v


def bits_to_index(bits):
    idx = 0
    for b in bits:
        idx = (idx << 1) | (int(b) & 1)
    return idx


def index_to_bits(idx, n):
    return tuple((idx >> (n - 1 - q)) & 1 for q in range(n))


def hamming_weights(n):
    """Hamming weight of every basis index for n qubits."""
    idx = np.arange(2 ** n)
    w = np.zeros(2 ** n, dtype=np.int64)
    for q in range(n):
        w += (idx >> q) & 1
    return w


def embed(op, qubits, n):
    """Place an operator acting on ``qubits`` (in that order) into n qubits."""
    qubits = list(qubits)
    k = len(qubits)
    if op.shape != (2 ** k, 2 ** k):
        raise ValueError("operator shape does not match qubit list")
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = qubits + rest
    # full acts on factors ordered as `order`; permute back to 0..n-1
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2 ** n, 2 ** n)


def permute_qubits(op, perm):
    """Relabel factors: output factor j is input factor perm[j]."""
    n = num_qubits(op)
    t = op.reshape([2] * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2 ** n, 2 ** n)


def partial_trace(rho, keep, n=None):
    """Reduced operator on the sorted qubits in ``keep``.

    An empty ``keep`` returns the full trace as a 1x1 array.
    """
    if n is None:
        n = num_qubits(rho)
    keep = sorted(set(keep))
    if any(q < 0 or q >= n for q in keep):
        raise ValueError("keep must be a subset of range(n)")
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


# --------------------------------------------------- matrix functions

def hermitize(a, tol=HERMITIAN_TOL):
    """Symmetrize a nearly Hermitian matrix; raise if it is not close."""
    a = np.asarray(a, dtype=complex)
    asym = np.abs(a - a.conj().T).max() if a.size else 0.0
    if asym >= tol:
        raise ValueError("matrix is not Hermitian (asymmetry %.3e)" % asym)
    return 0.5 * (a + a.conj().T)


def herm_fn(a, fn, tol=HERMITIAN_TOL):
    """Apply a scalar function to a Hermitian matrix via eigh."""
    w, v = np.linalg.eigh(hermitize(a, tol))
    return (v * fn(w)) @ v.conj().T


def herm_expm(a, tol=HERMITIAN_TOL):
    return herm_fn(a, np.exp, tol)


def herm_sqrt(a, tol=HERMITIAN_TOL):
    return herm_fn(a, lambda w: np.sqrt(np.clip(w, 0, None)), tol)


def herm_power(a, s, tol=HERMITIAN_TOL):
    """Fractional power of a positive definite matrix."""
    w, v = np.linalg.eigh(hermitize(a, tol))
    if w.min() <= 0 and s < 0:
        raise ValueError("negative power of a singular matrix")
    return (v * np.clip(w, 0, None) ** s) @ v.conj().T


def herm_log(a, tol=HERMITIAN_TOL):
    w, v = np.linalg.eigh(hermitize(a, tol))
    if w.min() <= 0:
        raise ValueError("logarithm of a singular matrix")
    return (v * np.log(w)) @ v.conj().T


def expm(a):
    """General matrix exponential (scaling and squaring)."""
    return _expm(np.asarray(a, dtype=complex))


# -------------------------------------------------------------- states

def is_density_matrix(rho, tol=1e-12):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol


def random_density_matrix(n, rng, rank=None):
    """Ginibre-distributed mixed state on n qubits."""
    d = 2 ** n
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(n, rng):
    d = 2 ** n
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def regularize(rho, eps=1e-9):
    d = rho.shape[0]
    return (1 - eps) * rho + eps * np.eye(d) / d


def von_neumann_entropy(rho):
    w = np.linalg.eigvalsh(hermitize(rho))
    w = w[w > 1e-15]
    return float(-(w * np.log(w)).sum())


def trace_norm(a):
    """Trace norm of a Hermitian matrix (or of any matrix via SVD)."""
    a = np.asarray(a, dtype=complex)
    if np.abs(a - a.conj().T).max() < HERMITIAN_TOL:
        return float(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T))).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def trace_distance(rho, sigma):
    return 0.5 * trace_norm(rho - sigma)


@dataclass(frozen=True)
class Divergences:
    trace_distance: float
    relative_entropy: float
    fidelity: float


def relative_entropy(rho, sigma, cutoff=1e-14):
    """Tr rho (log rho - log sigma) in nats; inf when supports do not nest."""
    wr, vr = np.linalg.eigh(hermitize(rho))
    ws, vs = np.linalg.eigh(hermitize(sigma))
    wr = np.clip(wr, 0, None)
    pr = wr > cutoff
    ps = ws > cutoff
    # weight of rho outside the support of sigma
    overlap = np.abs(vs.conj().T @ vr) ** 2
    outside = (overlap[~ps][:, pr] * wr[pr]).sum()
    if outside > 1e-10:
        return math.inf
    s_rho = float((wr[pr] * np.log(wr[pr])).sum())
    log_s = np.where(ps, np.log(np.where(ps, ws, 1.0)), 0.0)
    cross = float((overlap[:, pr] * wr[pr] * log_s[:, None]).sum())
    return max(s_rho - cross, 0.0)


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(Tr|sqrt(rho) sqrt(sigma)|)**2``."""
    sr = herm_sqrt(rho)
    ss = herm_sqrt(sigma)
    return float(np.linalg.svd(sr @ ss, compute_uv=False).sum() ** 2)


def divergences(rho, sigma):
    return Divergences(trace_distance(rho, sigma), relative_entropy(rho, sigma),
                       min(fidelity(rho, sigma), 1.0))


# ------------------------------------------------------ superoperators

def vec(x):
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, d=None):
    if d is None:
        d = int(round(math.sqrt(v.size)))
    return np.asarray(v).reshape(d, d, order="F")


def sandwich(a, b):
    """Superoperator of ``X -> a X b``."""
    return np.kron(b.T, a)


def apply_superop(s, x):
    return unvec(s @ vec(x), x.shape[0])


def kraus_to_superop(kraus):
    return sum(np.kron(k.conj(), k) for k in kraus)


def choi_matrix(s):
    """Choi matrix sum_ij |i><j| (x) S(|i><j|), input factor first."""
    d = int(round(math.sqrt(s.shape[0])))
    # S[(a,b),(j,i)] in column-stacked indices: S[b*d+a, j*d+i] maps |i><j| -> |a><b|
    t = s.reshape(d, d, d, d)  # [b, a, j, i]
    return t.transpose(3, 1, 2, 0).reshape(d * d, d * d)


@dataclass(frozen=True)
class CPTPReport:
    is_cp: bool
    is_tp: bool
    min_choi_eig: float


def cptp_check(s, tol=1e-8):
    d = int(round(math.sqrt(s.shape[0])))
    j = choi_matrix(s)
    min_eig = float(np.linalg.eigvalsh(0.5 * (j + j.conj().T)).min())
    # tracing out the output factor must give the identity on the input
    tr_out = np.einsum("iaja->ij", j.reshape(d, d, d, d))
    is_tp = bool(np.abs(tr_out - np.eye(d)).max() <= tol)
    return CPTPReport(min_eig >= -tol, is_tp, min_eig)
