"""Davies generators of parent Hamiltonians and their diagnostics.

A jump component that raises the energy by nu is
``A_nu = sum_k Pi_{k+nu} A Pi_k`` and is weighted by
``w(nu) = 1 / (1 + exp(beta * nu))``, so raising transitions are
suppressed by ``w(nu) / w(-nu) = exp(-beta * nu)`` and the Gibbs state is
the fixed point.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import expit

from .core import (CapacityError, PauliString, apply_superop, cptp_check, embed,
                   expm, hamming_weights, herm_expm, herm_log, herm_power,
                   pauli_basis_matrices, random_density_matrix, regularize,
                   relative_entropy, trace_norm, vec, unvec)
from .hamiltonian import build_parent, eigenprojector, gibbs_state

MAX_DAVIES_QUBITS = 5


def glauber_weight(nu, beta):
    return expit(-beta * np.asarray(nu, dtype=float))


def _weight_table(n, beta, weight):
    nus = np.arange(-n, n + 1)
    return nus, np.array([float(weight(int(v), beta)) for v in nus])


def davies_superop(u, energies, jumps, beta, weight=None):
    """Assemble sum_{a,nu} w(nu) D[A^a_nu] in the column-stacking convention.

    ``u`` is the eigenbasis (columns are eigenvectors with the integer
    ``energies``) and ``jumps`` a stack of dense jump operators.
    """
    if weight is None:
        weight = glauber_weight
    d = u.shape[0]
    n = int(round(math.log2(d)))
    jumps = np.asarray(jumps, dtype=complex).reshape(-1, d, d)
    rot = np.einsum("ji,ajk,kl->ail", u.conj(), jumps, u, optimize=True)
    e = np.asarray(energies)
    nu = e[:, None] - e[None, :]  # nu[y, x]: energy change |x> -> |y>
    nus, wts = _weight_table(n, beta, weight)
    wmat = wts[nu + n]

    flat = rot.reshape(len(rot), d * d)
    g = (flat.conj().T @ flat).reshape(d, d, d, d)  # [i,j,k,l] = sum conj(A_ij) A_kl
    same = nu[:, :, None, None] == nu[None, None, :, :]
    g = g * same * wmat[None, None, :, :]
    jump_part = g.transpose(0, 2, 1, 3).reshape(d * d, d * d)

    k = np.zeros((d, d), dtype=complex)
    for v, w in zip(nus, wts):
        mask = nu == v
        if not mask.any() or w == 0:
            continue
        b = rot * mask
        k += w * np.einsum("aji,ajk->ik", b.conj(), b, optimize=True)
    eye = np.eye(d)
    rotated = jump_part - 0.5 * np.kron(eye, k) - 0.5 * np.kron(k.T, eye)
    fwd = np.kron(u.conj(), u)
    back = np.kron(u.T, u.conj().T)
    return fwd @ rotated @ back


@dataclass
class DaviesGenerator:
    hp: object
    beta: float
    jumps: list          # (site, PauliString on the lightcone, normalization)
    jump_matrices: np.ndarray
    superop: np.ndarray
    weight: object = field(default=glauber_weight)

    @property
    def n(self):
        return self.hp.n

    @property
    def gibbs(self):
        return gibbs_state(self.hp, self.beta)[0]

    def frequency_components(self, a):
        """Map nu -> A^a_nu from the eigenprojectors."""
        a_mat = self.jump_matrices[a]
        projs = [eigenprojector(self.hp, k) for k in range(self.n + 1)]
        out = {}
        for nu in range(-self.n, self.n + 1):
            comp = np.zeros_like(a_mat)
            for k in range(self.n + 1):
                if 0 <= k + nu <= self.n:
                    comp += projs[k + nu] @ a_mat @ projs[k]
            out[nu] = comp
        return out

    def apply(self, rho):
        return apply_superop(self.superop, rho)


def lightcone_jumps(n, lightcones):
    """Scaled Pauli jumps 2^-|L_i| P for every P on every lightcone L_i."""
    labels, mats = [], []
    for i, lc in enumerate(lightcones):
        qs = sorted(lc)
        norm = 2.0 ** -len(qs)
        basis = pauli_basis_matrices(len(qs))
        for idx, p in enumerate(basis):
            letters = "".join("IXYZ"[(idx >> (2 * (len(qs) - 1 - j))) & 3] for j in range(len(qs)))
            full = ["I"] * n
            for q, c in zip(qs, letters):
                full[q] = c
            labels.append((i, PauliString.from_label("".join(full)), norm))
            mats.append(norm * embed(p, qs, n))
    return labels, np.array(mats)


def build_davies(hp, beta, weight=None):
    if hp.n > MAX_DAVIES_QUBITS:
        raise CapacityError("Davies generators support n <= %d" % MAX_DAVIES_QUBITS)
    if weight is None:
        weight = glauber_weight
    labels, mats = lightcone_jumps(hp.n, hp.lightcones)
    s = davies_superop(hp.unitary, hp.energies, mats, beta, weight)
    return DaviesGenerator(hp, beta, labels, mats, s, weight)


# -------------------------------------------------------- detailed balance

def _similarity(sigma, a, b):
    """Superoperator of X -> sigma^a X sigma^b."""
    return np.kron(herm_power(sigma, b).T, herm_power(sigma, a))


@dataclass(frozen=True)
class DetailedBalance:
    residual: float
    hermiticity_residual: float


def discriminant_matrix(gen, s=0.5):
    sigma = gen.gibbs
    left = _similarity(sigma, -(1 - s) / 2, -s / 2)
    right = _similarity(sigma, (1 - s) / 2, s / 2)
    return left @ gen.superop @ right


def detailed_balance_check(gen, s=0.5):
    """Self-adjointness residual of the adjoint generator under <.,.>_s."""
    sigma = gen.gibbs
    if np.linalg.eigvalsh(sigma).min() <= 0:
        raise ValueError("Gibbs state is singular")
    gram = _similarity(sigma, 1 - s, s)  # <A,B>_s = vec(A)^H gram vec(B)
    adj = gen.superop.conj().T
    r = gram @ adj - gen.superop @ gram
    d = sigma.shape[0]
    basis = pauli_basis_matrices(gen.n) / math.sqrt(d)
    pb = np.array([vec(p) for p in basis]).T
    res = float(np.abs(pb.conj().T @ r @ pb).max())
    k = discriminant_matrix(gen, s)
    herm = float(np.abs(k - k.conj().T).max())
    return DetailedBalance(res, herm)


@dataclass(frozen=True)
class Discriminant:
    s: float
    matrix: np.ndarray
    gap: float
    eigenvalues: np.ndarray
    kernel: np.ndarray


def discriminant_gap(gen, s=0.5, tol=1e-9):
    k = discriminant_matrix(gen, s)
    asym = np.abs(k - k.conj().T).max()
    if asym > 1e-8:
        raise ValueError("discriminant is not Hermitian (%.2e); detailed balance fails" % asym)
    k = 0.5 * (k + k.conj().T)
    w, v = np.linalg.eigh(-k)
    positive = w[w > tol]
    gap = float(positive.min()) if positive.size else 0.0
    kernel = v[:, 0]
    kernel = kernel / kernel[np.argmax(np.abs(kernel))] * abs(kernel[np.argmax(np.abs(kernel))])
    return Discriminant(s, k, gap, w, kernel)


def single_qubit_discriminant(beta, weight=None):
    """Closed-form 4x4 -K for one free qubit, basis |00>,|01>,|10>,|11>."""
    if weight is None:
        weight = glauber_weight
    up, down, zero = (float(weight(v, beta)) for v in (1, -1, 0))
    off = -math.sqrt(up * down)
    mid = (up + down) / 2 + zero
    return 0.5 * np.array([[up, 0, 0, off],
                           [0, mid, 0, 0],
                           [0, 0, mid, 0],
                           [off, 0, 0, down]], dtype=complex)


# ------------------------------------------------------------- dynamics

def evolve(gen, rho, t):
    if t < 0:
        raise ValueError("t must be non-negative")
    out = unvec(expm(t * gen.superop) @ vec(rho), rho.shape[0])
    return 0.5 * (out + out.conj().T)


class _Propagator:
    """e^{tL} through the Hermitian discriminant (valid under detailed balance)."""

    def __init__(self, gen):
        sigma = gen.gibbs
        self.fwd = _similarity(sigma, 0.25, 0.25)
        self.back = _similarity(sigma, -0.25, -0.25)
        k = self.back @ gen.superop @ self.fwd
        self.w, self.v = np.linalg.eigh(0.5 * (k + k.conj().T))
        self.d = sigma.shape[0]

    def __call__(self, t):
        mid = (self.v * np.exp(t * self.w)) @ self.v.conj().T
        return self.fwd @ mid @ self.back

    def apply(self, t, rho):
        out = unvec(self(t) @ vec(rho), self.d)
        return 0.5 * (out + out.conj().T)


def probe_states(gen, seed=0):
    n = gen.n
    d = 2 ** n
    out = []
    for x in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[x, x] = 1
        out.append(regularize(e))
    out.append(gen.gibbs)
    out.append(np.eye(d, dtype=complex) / d)
    rng = np.random.default_rng(seed)
    out.extend(random_density_matrix(n, rng) for _ in range(5))
    return out


@dataclass(frozen=True)
class MixingDiagnostics:
    halving_time: float
    entropy_curve: list
    fitted_rate: float
    monotone: bool


def mixing_diagnostics(gen, t_grid, seed=0):
    t_grid = sorted(float(t) for t in t_grid)
    if not t_grid:
        raise ValueError("empty time grid")
    if gen.n > 4:
        raise CapacityError("mixing diagnostics support n <= 4")
    prop = _Propagator(gen)
    probes = probe_states(gen, seed)
    pairs = [(a, b) for i, a in enumerate(probes) for b in probes[i + 1:]]
    diffs = np.array([vec(a - b) for a, b in pairs]).T
    norms = np.array([trace_norm(a - b) for a, b in pairs])
    keep = norms > 1e-12
    diffs, norms = diffs[:, keep], norms[keep]
    d = 2 ** gen.n
    halving = math.inf
    for t in t_grid:
        out = prop(t) @ diffs
        worst = max(trace_norm(unvec(out[:, j], d)) / norms[j] for j in range(out.shape[1]))
        if worst <= 0.5:
            halving = t
            break

    sigma = gen.gibbs
    top = np.zeros((d, d), dtype=complex)
    top[-1, -1] = 1
    u = gen.hp.unitary
    start = regularize(u @ top @ u.conj().T)
    monotone = True
    curves = []
    for rho in [start] + probes:
        curve = [relative_entropy(prop.apply(t, rho), sigma) for t in t_grid]
        curves.append(curve)
        if any(b > a + 1e-10 for a, b in zip(curve, curve[1:])):
            monotone = False
    curve = curves[0]
    ts = np.array(t_grid)
    vals = np.array(curve)
    ok = vals > 1e-12
    if ok.sum() >= 2:
        slope = np.polyfit(ts[ok], np.log(vals[ok]), 1)[0]
        rate = float(-slope)
    else:
        rate = math.inf
    return MixingDiagnostics(halving, list(zip(t_grid, curve)), rate, monotone)


def mixing_time_bound(gen, gap):
    """log(2 ||sigma^{-1/2}||) / gap."""
    lam = np.linalg.eigvalsh(gen.gibbs).min()
    return math.log(2 / math.sqrt(lam)) / gap


def entropy_production(gen, rho, eps=1e-9):
    rho = regularize(rho, eps)
    sigma = gen.gibbs
    lr = gen.apply(rho)
    lr = 0.5 * (lr + lr.conj().T)
    return float(np.trace(lr @ (herm_log(rho) - herm_log(sigma))).real)


def mlsi_single_constant(beta):
    return 1.0 / (16 * (1 + math.exp(beta)))


# ------------------------------------------------------ convex decomposition

@dataclass(frozen=True)
class ConvexDecomposition:
    q: float
    L_NI: np.ndarray
    L_rest: np.ndarray
    L_rotated: np.ndarray
    identity_residual: float
    rest_fixed_point_residual: float
    rest_cptp: object


def noninteracting_jumps(n):
    mats = []
    basis = pauli_basis_matrices(1)
    for i in range(n):
        for p in basis:
            mats.append(0.5 * embed(p, [i], n))
    return np.array(mats)


def rest_jumps(hp, q):
    """Jumps of the remainder generator in the rotated frame (unscaled by 1-q)."""
    n = hp.n
    c = hp.unitary
    mats = []
    basis1 = pauli_basis_matrices(1)
    for i, lc in enumerate(hp.lightcones):
        qs = sorted(lc)
        norm = 2.0 ** -len(qs)
        ui = hp.lightcone_unitary(i)
        v = c.conj().T @ ui
        for idx, p in enumerate(pauli_basis_matrices(len(qs))):
            active = [qs[j] for j in range(len(qs))
                      if (idx >> (2 * (len(qs) - 1 - j))) & 3]
            if set(active) <= {i}:
                continue
            mats.append(norm * v @ embed(p, qs, n) @ v.conj().T)
        excess = 4.0 ** (1 - len(qs)) - q
        if excess > 1e-15:
            for p in basis1:
                mats.append(math.sqrt(excess) * 0.5 * embed(p, [i], n))
    return np.array(mats) if mats else np.zeros((0, 2 ** n, 2 ** n), dtype=complex)


def convex_decomposition(gen, eps=1e-3):
    hp = gen.hp
    n = hp.n
    if n > 4:
        raise CapacityError("convex decomposition supports n <= 4")
    c = hp.unitary
    rotated = np.kron(c.T, c.conj().T) @ gen.superop @ np.kron(c.conj(), c)
    ident = np.eye(2 ** n, dtype=complex)
    energies = hamming_weights(n)
    l_ni = davies_superop(ident, energies, noninteracting_jumps(n), gen.beta, gen.weight)
    q = 4.0 ** (1 - hp.ell)
    d2 = 4 ** n
    if q >= 1:
        l_rest = np.zeros((d2, d2), dtype=complex)
        resid = float(np.abs(rotated - l_ni).max())
    else:
        jumps = rest_jumps(hp, q)
        l_rest = davies_superop(ident, energies, jumps, gen.beta, gen.weight) / (1 - q)
        resid = float(np.abs(rotated - q * l_ni - (1 - q) * l_rest).max())
    w = np.exp(-gen.beta * energies)
    sigma_ni = np.diag(w / w.sum()).astype(complex)
    fp = trace_norm(apply_superop(l_rest, sigma_ni))
    report = cptp_check(expm(eps * l_rest), 1e-8)
    return ConvexDecomposition(q, l_ni, l_rest, rotated, resid, fp, report)


# --------------------------------------------------- Fourier transform, filter

def oft_grid(n):
    """2n+1 equally spaced times, spacing 2 pi / (2n+1)."""
    return 2 * np.pi * np.arange(-n, n + 1) / (2 * n + 1)


def oft_components(H, a, times, n):
    """A_nu ~ (1/|S|) sum_t e^{-i nu t} e^{iHt} A e^{-iHt} for nu in [-n, n]."""
    out = {nu: np.zeros_like(a) for nu in range(-n, n + 1)}
    for t in times:
        u = _unitary_expm(H, t)
        at = u @ a @ u.conj().T
        for nu in out:
            out[nu] += np.exp(-1j * nu * t) * at
    return {nu: m / len(times) for nu, m in out.items()}


def _unitary_expm(H, t):
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (v * np.exp(1j * t * w)) @ v.conj().T


def oft_check(gen, a, times=None):
    n = gen.n
    if times is None:
        times = oft_grid(n)
    ref = gen.frequency_components(a)
    rec = oft_components(gen.hp.H, gen.jump_matrices[a], times, n)
    return max(float(np.abs(rec[nu] - ref[nu]).max()) for nu in ref)


@dataclass(frozen=True)
class BoltzmannFilter:
    W: np.ndarray
    W_trunc: np.ndarray
    actual_norm_err: float
    truncation_bound: float
    n_delta: float


def _rotation_blocks(gammas):
    m = len(gammas)
    W = np.zeros((2 * m, 2 * m))
    for j, g in enumerate(gammas):
        a, b = math.sqrt(g), math.sqrt(1 - g)
        W[2 * j:2 * j + 2, 2 * j:2 * j + 2] = [[a, -b], [b, a]]
    return W


def boltzmann_filter(n, beta, delta):
    """Block rotations with cos^2 = gamma(omega) for omega in [-n, n].

    gamma(omega) = w(-omega) is the weight of a transition that releases
    energy omega; the truncated filter clamps it to 1 above n_delta and to
    0 below -n_delta, with n_delta = log(1/delta) / beta.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    omegas = np.arange(-n, n + 1)
    gam = [float(glauber_weight(-w, beta)) for w in omegas]
    W = _rotation_blocks(gam)
    if beta == 0:
        nd = math.inf
        Wt = W.copy()
    else:
        nd = math.log(1 / delta) / beta
        gt = [1.0 if w > nd else 0.0 if w < -nd else g for w, g in zip(omegas, gam)]
        Wt = _rotation_blocks(gt)
    err = float(np.linalg.norm(W - Wt, 2))
    return BoltzmannFilter(W, Wt, err, 8 * n * math.sqrt(delta), nd)


def davies_for_circuit(c, beta):
    return build_davies(build_parent(c), beta)
