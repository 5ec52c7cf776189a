"""Dense operator and channel algebra on small qubit registers.

Operators are stored as dense complex matrices with qubit 0 as the most
significant tensor factor, so an operator ``A`` acting on qubit 0 of a
2-qubit register embeds as ``A (x) I``.  Channels carry an explicit Kraus
list and an eagerly derived Pauli transfer matrix

    ptm[y, x] = 2^{-q} tr[P_y C(P_x)],

which is the unique expansion of the channel in the orthogonal Pauli basis.
Everything here is immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

# Construction-time validations use ATOL_CONSTRUCT; checks on composed
# algebra (PTM products, adjoint round trips) use the looser ATOL_ALGEBRA.
ATOL_CONSTRUCT = 1e-12
ATOL_ALGEBRA = 1e-10

# Dense simulation is a desk-scale oracle only.
MAX_ORACLE_QUBITS = 10

PAULI_LETTERS = "IXYZ"

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE_PAULIS = (I2, X, Y, Z)

H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S_MATRIX = np.diag([1, 1j]).astype(complex)
T_MATRIX = np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)

GATE_MATRICES = {
    "identity": I2,
    "I": I2,
    "H": H_MATRIX,
    "S": S_MATRIX,
    "T": T_MATRIX,
    "X": X,
    "Y": Y,
    "Z": Z,
    "CNOT": CNOT_MATRIX,
    "CZ": CZ_MATRIX,
}

NOISE_MODELS = ("depolarizing", "dephasing", "amplitude_damping")


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    """Kronecker product of a sequence of matrices (left = qubit 0)."""
    return reduce(np.kron, mats)


@lru_cache(maxsize=8)
def pauli_basis(n_qubits: int) -> np.ndarray:
    """All n-qubit Pauli strings as a (4^n, 2^n, 2^n) array.

    Index order is base 4 with qubit 0 as the most significant digit,
    matching :meth:`PauliString.index`.
    """
    basis = SINGLE_PAULIS
    for _ in range(n_qubits - 1):
        basis = tuple(np.kron(a, b) for a in basis for b in SINGLE_PAULIS)
    out = np.stack(basis)
    out.setflags(write=False)
    return out


def _qubits_of(dim: int) -> int:
    q = int(round(math.log2(dim)))
    if 2**q != dim:
        raise ValueError(f"matrix side {dim} is not a power of two")
    return q


@dataclass(frozen=True)
class DenseOperator:
    """A complex 2^q x 2^q matrix on a q-qubit register.

    When ``hermitian`` is set, construction checks it holds to 1e-12.
    """

    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be a square matrix, got {mat.shape}")
        _qubits_of(mat.shape[0])
        if self.hermitian and np.abs(mat - mat.conj().T).max() > ATOL_CONSTRUCT:
            raise ValueError("operator flagged hermitian is not hermitian to 1e-12")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dim_qubits(self) -> int:
        return _qubits_of(self.dim)

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.entries.conj().T, hermitian=self.hermitian)

    def tensor(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(
            np.kron(self.entries, other.entries),
            hermitian=self.hermitian and other.hermitian,
        )


def _build_pauli_mult_table():
    # (a, b) -> (c, phase) with P_a P_b = phase * P_c for single-qubit Paulis
    table = {}
    for a in range(4):
        for b in range(4):
            prod = SINGLE_PAULIS[a] @ SINGLE_PAULIS[b]
            for c in range(4):
                pc = SINGLE_PAULIS[c]
                overlap = np.trace(pc.conj().T @ prod) / 2
                if abs(overlap) > 0.5:
                    table[(a, b)] = (c, complex(np.round(overlap)))
                    break
    return table


_PAULI_MULT = _build_pauli_mult_table()
_VALID_PHASES = (1 + 0j, -1 + 0j, 1j, -1j)


@dataclass(frozen=True)
class PauliString:
    """A signed/phased Pauli string, e.g. ``+X(x)Z(x)I``."""

    letters: str
    phase: complex = 1 + 0j

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or any(c not in PAULI_LETTERS for c in letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        phase = complex(self.phase)
        if not any(abs(phase - p) < 1e-12 for p in _VALID_PHASES):
            raise ValueError(f"phase must be one of +1, -1, +i, -i, got {phase}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "phase", min(_VALID_PHASES, key=lambda p: abs(phase - p)))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(PAULI_LETTERS.index(c) for c in self.letters)

    def index(self) -> int:
        """Flattened base-4 index into :func:`pauli_basis` (qubit 0 most significant)."""
        out = 0
        for k in self.indices:
            out = (out << 2) | k
        return out

    @classmethod
    def from_indices(cls, indices: Sequence[int], phase: complex = 1 + 0j) -> "PauliString":
        return cls("".join(PAULI_LETTERS[k] for k in indices), phase)

    def matrix(self) -> np.ndarray:
        return self.phase * kron_all([SINGLE_PAULIS[k] for k in self.indices])

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("length mismatch in Pauli product")
        phase = self.phase * other.phase
        letters = []
        for a, b in zip(self.indices, other.indices):
            c, ph = _PAULI_MULT[(a, b)]
            phase *= ph
            letters.append(PAULI_LETTERS[c])
        return PauliString("".join(letters), phase)


@dataclass(frozen=True)
class ProductState:
    """A product state given by one normalized ket per qubit."""

    kets: tuple

    def __post_init__(self):
        kets = []
        for ket in self.kets:
            v = np.asarray(ket, dtype=complex).reshape(-1)
            if v.shape != (2,):
                raise ValueError("each local ket must have 2 amplitudes")
            nrm = np.linalg.norm(v)
            if abs(nrm - 1.0) > 1e-9:
                raise ValueError("local kets must be normalized")
            v = v.copy()
            v.setflags(write=False)
            kets.append(v)
        object.__setattr__(self, "kets", tuple(kets))

    @classmethod
    def zero(cls, n_qubits: int) -> "ProductState":
        return cls(tuple(np.array([1.0, 0.0], dtype=complex) for _ in range(n_qubits)))

    @property
    def n_qubits(self) -> int:
        return len(self.kets)

    def density_matrix(self) -> np.ndarray:
        return kron_all([np.outer(v, v.conj()) for v in self.kets])


def _ptm_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    dim = kraus[0].shape[0]
    q = _qubits_of(dim)
    basis = pauli_basis(q)
    evolved = np.zeros_like(basis)
    for k in kraus:
        evolved += np.einsum("ab,xbc,dc->xad", k, basis, k.conj())
    ptm = np.einsum("ykl,xlk->yx", basis, evolved) / dim
    if np.abs(ptm.imag).max() < ATOL_CONSTRUCT:
        return np.ascontiguousarray(ptm.real)
    return ptm


@dataclass(frozen=True)
class NoisyChannel:
    """A completely positive trace-preserving map with explicit Kraus list.

    The Pauli transfer matrix is derived eagerly at construction; trace
    preservation (sum K_i^dag K_i = I) is validated to 1e-12.
    """

    kraus: tuple
    ptm: np.ndarray = field(compare=False, default=None)

    def __post_init__(self):
        ops = tuple(
            k if isinstance(k, DenseOperator) else DenseOperator(k) for k in self.kraus
        )
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        dim = ops[0].dim
        if any(k.dim != dim for k in ops):
            raise ValueError("Kraus operators must share one dimension")
        total = sum(k.entries.conj().T @ k.entries for k in ops)
        if np.abs(total - np.eye(dim)).max() > ATOL_CONSTRUCT:
            raise ValueError("Kraus operators are not trace preserving to 1e-12")
        object.__setattr__(self, "kraus", ops)
        ptm = _ptm_from_kraus([k.entries for k in ops])
        ptm.setflags(write=False)
        object.__setattr__(self, "ptm", ptm)

    @property
    def dim(self) -> int:
        return self.kraus[0].dim

    @property
    def dim_qubits(self) -> int:
        return self.kraus[0].dim_qubits

    def apply(self, mat: np.ndarray) -> np.ndarray:
        """C(mat) = sum_i K_i mat K_i^dag."""
        mat = np.asarray(mat, dtype=complex)
        out = np.zeros_like(mat)
        for k in self.kraus:
            out += k.entries @ mat @ k.entries.conj().T
        return out

    def apply_adjoint(self, mat: np.ndarray) -> np.ndarray:
        """C*(mat) = sum_i K_i^dag mat K_i (Hilbert-Schmidt adjoint)."""
        mat = np.asarray(mat, dtype=complex)
        out = np.zeros_like(mat)
        for k in self.kraus:
            out += k.entries.conj().T @ mat @ k.entries
        return out


def make_gate(name: str, params=None) -> NoisyChannel:
    """Unitary (noiseless) channel for a named gate.

    Supported names: H, S, T, X, Y, Z, CNOT, CZ, identity.  T is the
    standard magic gate diag(1, e^{i pi/4}).
    """
    key = name if name in GATE_MATRICES else name.upper()
    if key not in GATE_MATRICES:
        raise ValueError(f"unknown gate {name!r}; known: {sorted(set(GATE_MATRICES))}")
    return NoisyChannel((GATE_MATRICES[key],))


def make_noise(model: str, strength: float) -> NoisyChannel:
    """Single-qubit noise channel.

    depolarizing:       rho -> (1-3p) rho + p (X rho X + Y rho Y + Z rho Z),
                        valid for p <= 1/3 (the fully depolarizing point is p = 1/4).
    dephasing:          rho -> (1-p) rho + p Z rho Z.
    amplitude_damping:  Kraus K1 = [[1,0],[0,sqrt(1-q)]], K2 = [[0,sqrt(q)],[0,0]].
    """
    p = float(strength)
    if model == "depolarizing":
        if not 0.0 <= p <= 1.0 / 3.0 + 1e-15:
            raise ValueError(f"depolarizing strength must lie in [0, 1/3], got {p}")
        kraus = [
            math.sqrt(max(1.0 - 3.0 * p, 0.0)) * I2,
            math.sqrt(p) * X,
            math.sqrt(p) * Y,
            math.sqrt(p) * Z,
        ]
    elif model == "dephasing":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"dephasing strength must lie in [0, 1], got {p}")
        kraus = [math.sqrt(1.0 - p) * I2, math.sqrt(p) * Z]
    elif model == "amplitude_damping":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"amplitude damping strength must lie in [0, 1], got {p}")
        kraus = [
            np.array([[1, 0], [0, math.sqrt(1.0 - p)]], dtype=complex),
            np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex),
        ]
    else:
        raise ValueError(f"unknown noise model {model!r}; known: {NOISE_MODELS}")
    kraus = [k for k in kraus if np.abs(k).max() > 0]
    return NoisyChannel(tuple(kraus))


def compose_noisy_gate(gate: NoisyChannel, noise: NoisyChannel, per_qubit: bool = True) -> NoisyChannel:
    """The composition noise o gate (gate first, then noise).

    With ``per_qubit`` a single-qubit noise channel is tensored over every
    qubit the gate touches, e.g. CNOT followed by N (x) N.
    """
    noise_full = noise
    if per_qubit:
        if noise.dim_qubits != 1:
            raise ValueError("per_qubit composition expects single-qubit noise")
        kraus = [k.entries for k in noise.kraus]
        for _ in range(gate.dim_qubits - 1):
            kraus = [np.kron(a, b.entries) for a in kraus for b in noise.kraus]
        noise_full = NoisyChannel(tuple(kraus))
    if noise_full.dim != gate.dim:
        raise ValueError(
            f"dimension mismatch: gate on {gate.dim_qubits} qubits, "
            f"noise on {noise_full.dim_qubits}"
        )
    combined = tuple(
        n.entries @ g.entries for n in noise_full.kraus for g in gate.kraus
    )
    return NoisyChannel(combined)


def adjoint(ch: NoisyChannel) -> NoisyChannel:
    """The Hilbert-Schmidt adjoint channel (Kraus operators daggered).

    Satisfies tr[A^dag C(B)] = tr[(C*(A))^dag B].  Not trace preserving in
    general (only unital), so the result is returned as a raw Kraus map.
    """
    return _RawKrausMap(tuple(k.dagger() for k in ch.kraus))


class _RawKrausMap(NoisyChannel):
    """A Kraus map without the trace-preservation constraint (e.g. adjoints)."""

    def __post_init__(self):
        ops = tuple(
            k if isinstance(k, DenseOperator) else DenseOperator(k) for k in self.kraus
        )
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        object.__setattr__(self, "kraus", ops)
        ptm = _ptm_from_kraus([k.entries for k in ops])
        ptm.setflags(write=False)
        object.__setattr__(self, "ptm", ptm)


def pauli_vectorize(op) -> np.ndarray:
    """Coefficients c with op = sum_x c_x P_x, i.e. c_x = 2^{-q} tr[P_x op]."""
    mat = op.entries if isinstance(op, DenseOperator) else np.asarray(op, dtype=complex)
    q = _qubits_of(mat.shape[0])
    basis = pauli_basis(q)
    return np.einsum("xkl,lk->x", basis, mat) / mat.shape[0]


def pauli_reconstruct(coeffs: np.ndarray, n_qubits: int) -> np.ndarray:
    """Inverse of :func:`pauli_vectorize`."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (4**n_qubits,):
        raise ValueError(f"expected {4**n_qubits} coefficients, got {coeffs.shape}")
    return np.tensordot(coeffs, pauli_basis(n_qubits), axes=(0, 0))


def qubit_permutation_matrix(perm: Sequence[int], n_qubits: int) -> np.ndarray:
    """Permutation matrix P with (P psi) ordered so new position k holds old qubit perm[k]."""
    dim = 2**n_qubits
    mat = np.zeros((dim, dim))
    for old in range(dim):
        bits = [(old >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)]
        new = 0
        for k, src in enumerate(perm):
            new |= bits[src] << (n_qubits - 1 - k)
        mat[new, old] = 1.0
    return mat


def embed_operator(mat: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Embed a q-qubit matrix acting on ``targets`` into an n-qubit register."""
    q = _qubits_of(mat.shape[0])
    if len(targets) != q:
        raise ValueError("target count must match operator arity")
    if len(set(targets)) != q or any(t < 0 or t >= n_qubits for t in targets):
        raise ValueError(f"invalid target qubits {targets} for register of {n_qubits}")
    rest = [k for k in range(n_qubits) if k not in targets]
    perm = list(targets) + rest
    p = qubit_permutation_matrix(perm, n_qubits)
    full = np.kron(mat, np.eye(2 ** len(rest)))
    return p.T @ full @ p


def embed_channel(ch: NoisyChannel, targets: Sequence[int], n_qubits: int) -> NoisyChannel:
    """The channel acting on ``targets`` of an n-qubit register (identity elsewhere)."""
    kraus = tuple(embed_operator(k.entries, targets, n_qubits) for k in ch.kraus)
    cls = _RawKrausMap if isinstance(ch, _RawKrausMap) else NoisyChannel
    return cls(kraus)


def apply_channel(ch: NoisyChannel, targets: Sequence[int], op) -> DenseOperator:
    """Apply a local channel to chosen qubits of a register-sized operator."""
    mat = op.entries if isinstance(op, DenseOperator) else np.asarray(op, dtype=complex)
    n = _qubits_of(mat.shape[0])
    if n > MAX_ORACLE_QUBITS:
        raise ValueError(f"register of {n} qubits exceeds dense limit {MAX_ORACLE_QUBITS}")
    if ch.dim_qubits != len(targets):
        raise ValueError("channel arity does not match target count")
    embedded = embed_channel(ch, targets, n)
    return DenseOperator(embedded.apply(mat))
