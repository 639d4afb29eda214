"""Gate-level circuits: unitaries, lightcones, Z-supports and sampling."""

from dataclasses import dataclass, field
import hashlib
import math

import numpy as np

from .core import CapacityError, embed

MAX_UNITARY_QUBITS = 12
MAX_STATEVECTOR_QUBITS = 20
MAX_SYMBOLIC_TERMS = 1 << 14

KINDS = ("H", "CNOT", "CZ", "TPOW", "ZROT", "MZROT")
DIAGONAL_KINDS = ("CZ", "TPOW", "ZROT", "MZROT")


@dataclass(frozen=True)
class Gate:
    """A gate. ``param`` is k (mod 8) for TPOW and an angle for (M)ZROT.

    ZROT(theta) is exp(i theta Z) and MZROT(theta) is exp(i theta Z...Z).
    """

    kind: str
    qubits: tuple
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown gate kind %r" % self.kind)
        q = tuple(int(x) for x in self.qubits)
        object.__setattr__(self, "qubits", q)
        if len(set(q)) != len(q):
            raise ValueError("repeated qubit in %s gate" % self.kind)
        arity = {"H": 1, "CNOT": 2, "CZ": 2, "TPOW": 1, "ZROT": 1}.get(self.kind)
        if arity is not None and len(q) != arity:
            raise ValueError("%s acts on %d qubits" % (self.kind, arity))
        if self.kind == "MZROT" and len(q) < 1:
            raise ValueError("MZROT needs at least one qubit")
        if self.kind == "TPOW":
            object.__setattr__(self, "param", int(self.param) % 8)

    @property
    def depth_cost(self):
        k = len(self.qubits)
        if self.kind == "MZROT" and k > 2:
            return 2 * math.ceil(math.log2(k)) + 1
        if self.kind == "MZROT" and k == 2:
            return 3
        return 1

    def matrix(self):
        k = self.kind
        if k == "H":
            return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        if k == "CNOT":
            m = np.eye(4, dtype=complex)
            m[2:, 2:] = [[0, 1], [1, 0]]
            return m
        return np.diag(self.diagonal())

    def diagonal(self):
        """Diagonal of a diagonal gate over its qubits (first qubit MSB)."""
        k = self.kind
        if k == "CZ":
            return np.array([1, 1, 1, -1], dtype=complex)
        if k == "TPOW":
            return np.array([1, np.exp(1j * np.pi * self.param / 4)])
        if k == "ZROT":
            return np.exp(1j * self.param * np.array([1, -1]))
        if k == "MZROT":
            m = len(self.qubits)
            idx = np.arange(2 ** m)
            par = np.zeros(2 ** m, dtype=np.int64)
            for q in range(m):
                par ^= (idx >> q) & 1
            return np.exp(1j * self.param * (1 - 2 * par))
        raise ValueError("%s is not diagonal" % k)

    def to_line(self):
        q = " ".join(str(x) for x in self.qubits)
        if self.kind == "TPOW":
            return "TPOW %s %d" % (q, self.param)
        if self.kind == "ZROT":
            return "ZROT %s %r" % (q, float(self.param))
        if self.kind == "MZROT":
            return "MZROT %r %s" % (float(self.param), q)
        return "%s %s" % (self.kind, q)


def H(q):
    return Gate("H", (q,))


def CNOT(c, t):
    return Gate("CNOT", (c, t))


def CZ(a, b):
    return Gate("CZ", (a, b))


def TPOW(q, k):
    return Gate("TPOW", (q,), k)


def ZROT(q, theta):
    return Gate("ZROT", (q,), theta)


def MZROT(theta, qubits):
    return Gate("MZROT", tuple(qubits), theta)


@dataclass(frozen=True)
class Circuit:
    n: int
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        for layer in layers:
            used = set()
            for g in layer:
                for q in g.qubits:
                    if q < 0 or q >= self.n:
                        raise ValueError("qubit %d out of range for n=%d" % (q, self.n))
                    if q in used:
                        raise ValueError("qubit %d used twice in one layer" % q)
                    used.add(q)

    @property
    def gates(self):
        return [g for layer in self.layers for g in layer]

    @property
    def depth(self):
        return sum(max((g.depth_cost for g in layer), default=0) for layer in self.layers)

    @property
    def two_qubit_depth(self):
        """Number of layers that contain a multi-qubit gate."""
        return sum(1 for layer in self.layers if any(len(g.qubits) > 1 for g in layer))

    def adjoint(self):
        layers = []
        for layer in reversed(self.layers):
            new = []
            for g in layer:
                if g.kind == "TPOW":
                    new.append(TPOW(g.qubits[0], -g.param))
                elif g.kind in ("ZROT", "MZROT"):
                    new.append(Gate(g.kind, g.qubits, -g.param))
                else:
                    new.append(g)
            layers.append(tuple(new))
        return Circuit(self.n, tuple(layers))

    def then(self, other):
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return Circuit(self.n, self.layers + other.layers)


def schedule(n, gates):
    """Pack gates, in order, into the earliest layer after their last use."""
    free = [0] * n
    layers = []
    for g in gates:
        t = max(free[q] for q in g.qubits)
        while len(layers) <= t:
            layers.append([])
        layers[t].append(g)
        for q in g.qubits:
            free[q] = t + 1
    return Circuit(n, tuple(tuple(layer) for layer in layers))


# ------------------------------------------------------------ text format

class CircuitParseError(ValueError):
    pass


def parse_circuit(text):
    n = None
    layers = [[]]
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "qubits":
                if n is not None or len(tok) != 2:
                    raise CircuitParseError("bad header")
                n = int(tok[1])
                if n < 0:
                    raise CircuitParseError("negative qubit count")
                continue
            if n is None:
                raise CircuitParseError("missing 'qubits n' header")
            if tok[0] == "---":
                layers.append([])
                continue
            kind = tok[0].upper()
            if kind in ("H",):
                g = H(int(tok[1])) if len(tok) == 2 else None
            elif kind in ("CNOT", "CZ"):
                g = Gate(kind, (int(tok[1]), int(tok[2]))) if len(tok) == 3 else None
            elif kind == "TPOW":
                g = TPOW(int(tok[1]), int(tok[2])) if len(tok) == 3 else None
            elif kind == "ZROT":
                g = ZROT(int(tok[1]), float(tok[2])) if len(tok) == 3 else None
            elif kind == "MZROT":
                g = MZROT(float(tok[1]), [int(x) for x in tok[2:]]) if len(tok) >= 3 else None
            else:
                raise CircuitParseError("unknown gate %r" % tok[0])
            if g is None:
                raise CircuitParseError("wrong operand count")
            layers[-1].append(g)
        except CircuitParseError as exc:
            raise CircuitParseError("line %d: %s" % (lineno, exc)) from None
        except ValueError as exc:
            raise CircuitParseError("line %d: %s" % (lineno, exc)) from None
    if n is None:
        raise CircuitParseError("missing 'qubits n' header")
    layers = [layer for layer in layers if layer]
    try:
        return Circuit(n, tuple(tuple(layer) for layer in layers))
    except ValueError as exc:
        raise CircuitParseError(str(exc)) from None


def dump_circuit(c):
    lines = ["qubits %d" % c.n]
    for i, layer in enumerate(c.layers):
        if i:
            lines.append("---")
        lines.extend(g.to_line() for g in layer)
    return "\n".join(lines) + "\n"


def load_circuit(path):
    with open(path) as fh:
        return parse_circuit(fh.read())


# ------------------------------------------------------------- simulation

def _apply_gate(g, state, n):
    """Apply a gate to ``state`` of shape (2,)*n + (m,)."""
    qs = list(g.qubits)
    if g.kind in DIAGONAL_KINDS:
        diag = g.diagonal().reshape([2] * len(qs))
        # move gate qubits to the front, broadcast the diagonal
        t = np.moveaxis(state, qs, list(range(len(qs))))
        t = t * diag.reshape(diag.shape + (1,) * (t.ndim - len(qs)))
        return np.moveaxis(t, list(range(len(qs))), qs)
    m = g.matrix().reshape([2] * (2 * len(qs)))
    k = len(qs)
    t = np.tensordot(m, state, axes=(list(range(k, 2 * k)), qs))
    return np.moveaxis(t, list(range(k)), qs)


def _evolve(c, state):
    n = c.n
    t = state.reshape([2] * n + [-1])
    for g in c.gates:
        t = _apply_gate(g, t, n)
    return t.reshape(2 ** n, -1)


def build_unitary(c):
    if c.n > MAX_UNITARY_QUBITS:
        raise CapacityError("build_unitary supports n <= %d" % MAX_UNITARY_QUBITS)
    return _evolve(c, np.eye(2 ** c.n, dtype=complex))


def apply_circuit(c, psi):
    if c.n > MAX_STATEVECTOR_QUBITS:
        raise CapacityError("statevector supports n <= %d" % MAX_STATEVECTOR_QUBITS)
    return _evolve(c, np.asarray(psi, dtype=complex).reshape(-1, 1))[:, 0]


def output_state(c):
    psi = np.zeros(2 ** c.n, dtype=complex)
    psi[0] = 1
    return apply_circuit(c, psi)


def output_distribution(c):
    """Exact probabilities p(x) = |<x|C|0^n>|^2 indexed with qubit 0 as MSB."""
    p = np.abs(output_state(c)) ** 2
    return p / p.sum()


def sample_table(probs, seed, count):
    """Inverse-CDF sampling of basis indices from a probability table."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = rng.random(count)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def indices_to_bits(idx, n):
    idx = np.asarray(idx, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def sample(c, seed, count):
    """``count`` bitstrings (rows of an (count, n) uint8 array)."""
    return indices_to_bits(sample_table(output_distribution(c), seed, count), c.n)


# ---------------------------------------------------------------- supports

@dataclass(frozen=True)
class Supports:
    lightcone: tuple
    reverse_lightcone: tuple
    z_support: tuple
    ell: int
    ell_r: int
    r: int


def lightcones(c):
    """Forward causal reach of each input wire, including the wire itself."""
    reach = [{i} for i in range(c.n)]
    for g in c.gates:
        qs = set(g.qubits)
        for r in reach:
            if r & qs:
                r |= qs
    return [frozenset(r) for r in reach]


def lightcone_gate_positions(c, i):
    """Positions in ``c.gates`` of the gates touching the causal region of wire i."""
    reach = {i}
    out = []
    for j, g in enumerate(c.gates):
        if reach & set(g.qubits):
            reach |= set(g.qubits)
            out.append(j)
    return out


def lightcone_gates(c, i):
    gates = c.gates
    return [gates[j] for j in lightcone_gate_positions(c, i)]


def _heisenberg_terms(c, x0, z0):
    """Propagate the Pauli X^x0 Z^z0 to C P C^dagger as a sparse Pauli sum.

    Terms are stored as {(x_mask, z_mask): coeff} for the operator
    X^x Z^z (X factors to the left), masks are python ints with bit q for
    qubit q. Returns None if the term count exceeds the cap.
    """
    terms = {(x0, z0): 1.0 + 0j}
    for g in c.gates:
        qs = g.qubits
        new = {}

        def add(key, val):
            new[key] = new.get(key, 0) + val

        if g.kind == "H":
            b = 1 << qs[0]
            for (x, z), v in terms.items():
                xq, zq = x & b, z & b
                sign = -1 if (xq and zq) else 1
                nx = (x & ~b) | (b if zq else 0)
                nz = (z & ~b) | (b if xq else 0)
                add((nx, nz), sign * v)
        elif g.kind == "CNOT":
            bc, bt = 1 << qs[0], 1 << qs[1]
            for (x, z), v in terms.items():
                nx = x ^ (bt if x & bc else 0)
                nz = z ^ (bc if z & bt else 0)
                add((nx, nz), v)
        elif g.kind == "CZ":
            ba, bb = 1 << qs[0], 1 << qs[1]
            for (x, z), v in terms.items():
                sign = -1 if (x & ba and x & bb) else 1
                nz = z ^ (bb if x & ba else 0) ^ (ba if x & bb else 0)
                add((x, nz), sign * v)
        elif g.kind in ("ZROT", "MZROT"):
            mask = 0
            for q in qs:
                mask |= 1 << q
            c2, s2 = math.cos(2 * g.param), math.sin(2 * g.param)
            for (x, z), v in terms.items():
                if bin(x & mask).count("1") % 2 == 0:
                    add((x, z), v)
                else:
                    # D X D^dag = X (cos 2t - i sin 2t Z_Q) on the odd-overlap part
                    add((x, z), c2 * v)
                    add((x, z ^ mask), -1j * s2 * v)
        elif g.kind == "TPOW":
            b = 1 << qs[0]
            phi = np.pi * g.param / 4
            # ratio diag(e^{i phi}, e^{-i phi}) = cos(phi) I + i sin(phi) Z
            cp, sp = math.cos(phi), math.sin(phi)
            for (x, z), v in terms.items():
                if not x & b:
                    add((x, z), v)
                else:
                    add((x, z), cp * v)
                    add((x, z ^ b), 1j * sp * v)
        terms = {k: v for k, v in new.items() if abs(v) > 1e-12}
        if len(terms) > MAX_SYMBOLIC_TERMS:
            return None
    return terms


def _support_of_terms(terms):
    mask = 0
    for x, z in terms:
        mask |= x | z
    return mask


def z_support_dense(c, i):
    """Support of C Z_i C^dagger from the dense matrix."""
    if c.n > MAX_UNITARY_QUBITS:
        raise CapacityError("dense support supports n <= %d" % MAX_UNITARY_QUBITS)
    u = build_unitary(c)
    z = embed(np.diag([1.0, -1.0]).astype(complex), [i], c.n)
    return dense_support(u @ z @ u.conj().T)


def dense_support(op, tol=1e-10):
    """Qubits on which an operator acts nontrivially."""
    n = int(round(math.log2(op.shape[0])))
    out = set()
    for q in range(n):
        t = op.reshape([2] * (2 * n))
        t = np.moveaxis(t, [q, n + q], [0, 1])
        # identity on q  <=>  blocks [a,b] = delta_ab * common block
        if (np.abs(t[0, 1]).max() > tol or np.abs(t[1, 0]).max() > tol
                or np.abs(t[0, 0] - t[1, 1]).max() > tol):
            out.add(q)
    return frozenset(out)


def z_support(c, i):
    terms = _heisenberg_terms(c, 0, 1 << i)
    if terms is None:
        return z_support_dense(c, i)
    mask = _support_of_terms(terms)
    return frozenset(q for q in range(c.n) if mask >> q & 1)


def heisenberg_z(c, i):
    """Sparse Pauli expansion of C Z_i C^dagger (None past the term cap)."""
    return _heisenberg_terms(c, 0, 1 << i)


def supports(c):
    lc = lightcones(c)
    rev = [frozenset(i for i in range(c.n) if j in lc[i]) for j in range(c.n)]
    zs = [z_support(c, i) for i in range(c.n)]
    return Supports(
        lightcone=tuple(lc),
        reverse_lightcone=tuple(rev),
        z_support=tuple(zs),
        ell=max((len(x) for x in lc), default=0),
        ell_r=max((len(x) for x in rev), default=0),
        r=max((len(x) for x in zs), default=0),
    )


# ---------------------------------------------------------------- builders

def grid_edges(width, height):
    """Grid edges split into four matchings: even/odd horizontal, even/odd vertical."""
    def q(x, y):
        return y * width + x
    groups = [[], [], [], []]
    for y in range(height):
        for x in range(width - 1):
            groups[x % 2].append((q(x, y), q(x + 1, y)))
    for y in range(height - 1):
        for x in range(width):
            groups[2 + y % 2].append((q(x, y), q(x, y + 1)))
    return groups


def build_iqp_cluster(width, height, b):
    if width <= 0 or height <= 0:
        raise ValueError("grid dimensions must be positive")
    n = width * height
    b = [int(v) % 8 for v in b]
    if len(b) != n:
        raise ValueError("need one T power per qubit")
    layers = [tuple(H(q) for q in range(n))]
    for group in grid_edges(width, height):
        if group:
            layers.append(tuple(CZ(a, c) for a, c in group))
    tl = tuple(TPOW(q, b[q]) for q in range(n) if b[q])
    if tl:
        layers.append(tl)
    layers.append(tuple(H(q) for q in range(n)))
    return Circuit(n, tuple(layers))


def random_b(n, seed):
    return [int(v) for v in np.random.default_rng(seed).integers(0, 8, n)]


def random_circuit(n, depth, rng, two_qubit_prob=0.5, kinds=("H", "TPOW", "CNOT", "CZ")):
    """Random layered circuit of exactly ``depth`` nonempty layers."""
    one = [k for k in kinds if k in ("H", "TPOW", "ZROT")]
    two = [k for k in kinds if k in ("CNOT", "CZ")]
    layers = []
    while len(layers) < depth:
        free = list(rng.permutation(n))
        layer = []
        while free:
            q = int(free.pop())
            if two and free and rng.random() < two_qubit_prob:
                p = int(free.pop())
                kind = two[rng.integers(len(two))]
                layer.append(Gate(kind, (q, p)))
            elif one and rng.random() < 0.7:
                kind = one[rng.integers(len(one))]
                if kind == "H":
                    layer.append(H(q))
                elif kind == "TPOW":
                    layer.append(TPOW(q, int(rng.integers(1, 8))))
                else:
                    layer.append(ZROT(q, float(rng.uniform(-np.pi, np.pi))))
        if layer:
            layers.append(tuple(layer))
    return Circuit(n, tuple(layers))


def is_iqp_shaped(c):
    """H on every qubit, then only diagonal gates, then H on every qubit."""
    if len(c.layers) < 2:
        return False
    full = set(range(c.n))
    for layer in (c.layers[0], c.layers[-1]):
        if any(g.kind != "H" for g in layer) or {g.qubits[0] for g in layer} != full:
            return False
    return all(g.kind in DIAGONAL_KINDS for layer in c.layers[1:-1] for g in layer)


def circuit_hash(c):
    return hashlib.sha256(dump_circuit(c).encode()).hexdigest()[:16]
