"""Frame catalogs and their overlap evaluators.

Five catalogs are provided:

* diagonal stabilizer  -- projectors |psi><psi| onto stabilizer states
  (6 elements on 1 qubit, 60 on 2 qubits),
* dyadic stabilizer    -- all ordered dyads |psi1><psi2| (36 / 3600),
* product              -- tensor products drawn from a finite local set of
  single-qubit states (the 6 stabilizer states plus seeded Haar-random extras),
* pauli                -- the Pauli operator basis,
* extended pauli       -- the Pauli set augmented per qubit with
  a(X+Y)/sqrt(2) and a(X-Y)/sqrt(2) for a hyperparameter a in [0, 1].

Stabilizer state vectors are enumerated by breadth-first closure of
{H, S, CNOT} applied to |0..0> and carry a canonical global phase (first
nonzero amplitude real positive), which makes deduplication, dyad
construction and catalog ordering deterministic.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .operators import (
    SINGLE_PAULIS,
    DenseOperator,
    PauliString,
    ProductState,
    embed_operator,
    kron_all,
    X,
    Y,
    Z,
    H_MATRIX,
    S_MATRIX,
    CNOT_MATRIX,
)

STABILIZER_ENUM_MAX_QUBITS = 2
# The Monte Carlo engine holds diagonal-stabilizer elements densely up to
# 3 qubits (1080 states); the public enumeration keeps the documented q <= 2.
_STABILIZER_DENSE_MAX_QUBITS = 3


class FrameKind(str, Enum):
    DIAG_STAB = "diag-stab"
    DYAD_STAB = "dyad-stab"
    PRODUCT = "product"
    PAULI = "pauli"
    EXT_PAULI = "ext-pauli"


PRODUCT_SHAPED = (FrameKind.PRODUCT, FrameKind.PAULI, FrameKind.EXT_PAULI)
STABILIZER_KINDS = (FrameKind.DIAG_STAB, FrameKind.DYAD_STAB)


@dataclass(frozen=True)
class FrameElementLabel:
    """Index of one frame element: an int for enumerated stabilizer catalogs,
    a tuple of per-qubit local indices for product-shaped catalogs."""

    frame_kind: FrameKind
    payload: object

    def __post_init__(self):
        if self.frame_kind in STABILIZER_KINDS:
            if not isinstance(self.payload, (int, np.integer)) and not (
                self.frame_kind is FrameKind.DYAD_STAB and isinstance(self.payload, tuple)
            ):
                raise ValueError("stabilizer labels are catalog indices")
        else:
            if not isinstance(self.payload, tuple):
                raise ValueError("product-shaped labels are tuples of local indices")


def canonical_phase(vec: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Normalize and rotate so the first nonzero amplitude is real positive."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    for a in v:
        if abs(a) > tol:
            v = v * (a.conjugate() / abs(a))
            break
    return v


def _vec_key(vec: np.ndarray) -> tuple:
    return tuple(np.round(vec.view(float), 9))


def stabilizer_state_vectors(q: int, _allow_dense_limit: bool = False) -> np.ndarray:
    """All q-qubit stabilizer state vectors, canonically phased and sorted.

    Public callers are limited to q <= 2; the dense simulator may request
    q = 3 internally (1080 states).
    """
    limit = _STABILIZER_DENSE_MAX_QUBITS if _allow_dense_limit else STABILIZER_ENUM_MAX_QUBITS
    if not 1 <= q <= limit:
        raise ValueError(f"stabilizer enumeration supports 1 <= q <= {limit}, got {q}")
    return _stabilizer_closure(q)


@lru_cache(maxsize=4)
def _stabilizer_closure(q: int) -> np.ndarray:
    gens = []
    for k in range(q):
        gens.append(embed_operator(H_MATRIX, (k,), q))
        gens.append(embed_operator(S_MATRIX, (k,), q))
    for a, b in itertools.permutations(range(q), 2):
        gens.append(embed_operator(CNOT_MATRIX, (a, b), q))

    start = np.zeros(2**q, dtype=complex)
    start[0] = 1.0
    start = canonical_phase(start)
    seen = {_vec_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = canonical_phase(g @ v)
                key = _vec_key(w)
                if key not in seen:
                    seen[key] = w
                    nxt.append(w)
        frontier = nxt
    vecs = sorted(seen.values(), key=_vec_key)
    out = np.stack(vecs)
    out.setflags(write=False)
    return out


def enumerate_stabilizer_states(q: int) -> list[DenseOperator]:
    """The q-qubit stabilizer projectors |psi><psi| (6 for q=1, 60 for q=2)."""
    vecs = stabilizer_state_vectors(q)
    return [DenseOperator(np.outer(v, v.conj()), hermitian=True) for v in vecs]


def build_dyadic_catalog(q: int) -> list[DenseOperator]:
    """All ordered dyads |psi1><psi2| of q-qubit stabilizer vectors (36 / 3600)."""
    vecs = stabilizer_state_vectors(q)
    return [
        DenseOperator(np.outer(v1, v2.conj()))
        for v1 in vecs
        for v2 in vecs
    ]


def haar_random_kets(count: int, seed: int) -> list[np.ndarray]:
    """Seeded Haar-random single-qubit kets (two complex Gaussians, normalized)."""
    rng = np.random.default_rng(seed)
    kets = []
    for _ in range(count):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        kets.append(canonical_phase(v))
    return kets


def build_ext_pauli_local_set(a: float) -> list[DenseOperator]:
    """Local operator set {I, X, Y, Z, a(X+Y)/sqrt2, a(X-Y)/sqrt2}."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"hyperparameter a must lie in [0, 1], got {a}")
    extra = [a * (X + Y) / math.sqrt(2), a * (X - Y) / math.sqrt(2)]
    return [DenseOperator(m, hermitian=True) for m in list(SINGLE_PAULIS) + extra]


@dataclass
class FrameCatalog:
    """An indexed frame {F_x} with evaluators for tr[O F_x] and tr[rho0 F_x].

    Product-shaped catalogs (product, pauli, ext-pauli) store a local set of
    single-qubit factors and label elements by tuples of local indices;
    stabilizer catalogs store explicitly enumerated elements indexed by
    integers (dyads by the flattened ordered pair).
    Immutable after construction; safe for concurrent reads.
    """

    kind: FrameKind
    n_qubits: int
    local_set: tuple = None
    elements: tuple = None
    state_vectors: np.ndarray = None
    hyper_a: float = None
    seed: int = None
    extra_random: int = None
    _local_pauli_overlaps: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind in PRODUCT_SHAPED:
            if not self.local_set:
                raise ValueError("product-shaped catalog needs a local set")
            mats = np.stack([f.entries for f in self.local_set])
            # t[j, p] = tr[P_p f_j]; all product overlaps factor through this table
            table = np.einsum("pkl,jlk->jp", np.stack(SINGLE_PAULIS), mats)
            table.setflags(write=False)
            self._local_pauli_overlaps = table
        elif self.kind in STABILIZER_KINDS:
            if self.state_vectors is None:
                raise ValueError("stabilizer catalog needs state vectors")

    # -- sizes and labels -------------------------------------------------

    @property
    def is_product_shaped(self) -> bool:
        return self.kind in PRODUCT_SHAPED

    @property
    def local_size(self) -> int:
        if not self.is_product_shaped:
            raise ValueError("local_size applies to product-shaped catalogs")
        return len(self.local_set)

    @property
    def n_states(self) -> int:
        return self.state_vectors.shape[0]

    def size(self) -> int:
        if self.is_product_shaped:
            return self.local_size**self.n_qubits
        if self.kind is FrameKind.DIAG_STAB:
            return self.n_states
        return self.n_states**2

    def labels(self):
        """All element labels in canonical (ascending) order."""
        if self.is_product_shaped:
            return list(itertools.product(range(self.local_size), repeat=self.n_qubits))
        return list(range(self.size()))

    def dyad_pair(self, index: int) -> tuple[int, int]:
        if self.kind is not FrameKind.DYAD_STAB:
            raise ValueError("dyad_pair applies to the dyadic catalog")
        return divmod(int(index), self.n_states)

    def dyad_index(self, bra_ket: tuple[int, int]) -> int:
        i, j = bra_ket
        return int(i) * self.n_states + int(j)

    # -- element access ---------------------------------------------------

    def element(self, label) -> np.ndarray:
        """The dense matrix of the labelled element."""
        if self.is_product_shaped:
            self._check_product_label(label)
            return kron_all([self.local_set[j].entries for j in label])
        idx = int(label)
        if self.kind is FrameKind.DIAG_STAB:
            v = self.state_vectors[idx]
            return np.outer(v, v.conj())
        i, j = self.dyad_pair(idx)
        return np.outer(self.state_vectors[i], self.state_vectors[j].conj())

    def _check_product_label(self, label):
        if len(label) != self.n_qubits:
            raise ValueError(
                f"label has {len(label)} local indices, catalog is on {self.n_qubits} qubits"
            )
        if any(not 0 <= j < self.local_size for j in label):
            raise ValueError(f"local index out of range in label {label}")

    def restrict(self, q: int) -> "FrameCatalog":
        """The same frame family on a q-qubit register (for local gate solves)."""
        if q == self.n_qubits:
            return self
        if self.is_product_shaped:
            return FrameCatalog(
                kind=self.kind,
                n_qubits=q,
                local_set=self.local_set,
                hyper_a=self.hyper_a,
                seed=self.seed,
                extra_random=self.extra_random,
            )
        return _stabilizer_catalog(self.kind, q)

    # -- overlap evaluators -------------------------------------------------

    def observable_overlap(self, label, obs: PauliString) -> complex:
        """tr[O F_x] for a Pauli observable; O(n) for product-shaped frames."""
        if obs.n_qubits != self.n_qubits:
            raise ValueError("observable length must match catalog qubits")
        if self.is_product_shaped:
            self._check_product_label(label)
            out = obs.phase
            for local_idx, p_idx in zip(label, obs.indices):
                out *= self._local_pauli_overlaps[local_idx, p_idx]
                if out == 0:
                    return 0j
            return complex(out)
        # dense trace for explicitly enumerated small-q catalogs
        if self.kind is FrameKind.DIAG_STAB:
            v = self.state_vectors[int(label)]
            return complex(v.conj() @ (obs.matrix() @ v))
        i, j = self.dyad_pair(int(label))
        vi, vj = self.state_vectors[i], self.state_vectors[j]
        return complex(vj.conj() @ (obs.matrix() @ vi))

    def state_overlap(self, label, state: ProductState | None = None) -> complex:
        """tr[rho0 F_x] for a product state (default |0...0>)."""
        if state is None:
            state = ProductState.zero(self.n_qubits)
        if not isinstance(state, ProductState):
            raise ValueError("only product-state descriptors are supported")
        if state.n_qubits != self.n_qubits:
            raise ValueError("state length must match catalog qubits")
        if self.is_product_shaped:
            self._check_product_label(label)
            out = 1.0 + 0j
            for local_idx, ket in zip(label, state.kets):
                out *= ket.conj() @ (self.local_set[local_idx].entries @ ket)
                if out == 0:
                    return 0j
            return complex(out)
        psi = kron_all([k.reshape(2, 1) for k in state.kets]).reshape(-1)
        if self.kind is FrameKind.DIAG_STAB:
            v = self.state_vectors[int(label)]
            return complex((psi.conj() @ v) * (v.conj() @ psi))
        i, j = self.dyad_pair(int(label))
        vi, vj = self.state_vectors[i], self.state_vectors[j]
        return complex((psi.conj() @ vi) * (vj.conj() @ psi))

    # -- manifests ----------------------------------------------------------

    def manifest(self) -> dict:
        """JSON-compatible description from which the catalog is reproducible."""
        out = {"kind": self.kind.value, "n_qubits": self.n_qubits}
        if self.kind is FrameKind.EXT_PAULI:
            out["hyper_a"] = self.hyper_a
        if self.kind is FrameKind.PRODUCT:
            out["seed"] = self.seed
            out["extra_random"] = self.extra_random
            out["local_states"] = [
                [[float(a.real), float(a.imag)] for a in _ket_of_projector(f.entries)]
                for f in self.local_set
            ]
        return out

    def manifest_hash(self) -> str:
        blob = json.dumps(self.manifest(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _ket_of_projector(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    return canonical_phase(vecs[:, int(np.argmax(vals))])


@lru_cache(maxsize=8)
def _stabilizer_catalog(kind: FrameKind, q: int) -> FrameCatalog:
    allow_dense = kind is FrameKind.DIAG_STAB
    vecs = stabilizer_state_vectors(q, _allow_dense_limit=allow_dense)
    return FrameCatalog(kind=kind, n_qubits=q, state_vectors=vecs)


def build_diag_stab_catalog(n_qubits: int) -> FrameCatalog:
    return _stabilizer_catalog(FrameKind.DIAG_STAB, n_qubits)


def build_dyad_stab_catalog(n_qubits: int) -> FrameCatalog:
    return _stabilizer_catalog(FrameKind.DYAD_STAB, n_qubits)


def build_product_catalog(extra_random: int, seed: int, n_qubits: int = 2) -> FrameCatalog:
    """Product frame whose local set is the 6 single-qubit stabilizer states
    plus ``extra_random`` seeded Haar-random states."""
    if extra_random < 0:
        raise ValueError("extra_random must be nonnegative")
    kets = list(stabilizer_state_vectors(1)) + haar_random_kets(extra_random, seed)
    local = tuple(DenseOperator(np.outer(v, v.conj()), hermitian=True) for v in kets)
    return FrameCatalog(
        kind=FrameKind.PRODUCT,
        n_qubits=n_qubits,
        local_set=local,
        seed=seed,
        extra_random=extra_random,
    )


def build_pauli_catalog(n_qubits: int) -> FrameCatalog:
    local = tuple(DenseOperator(p, hermitian=True) for p in SINGLE_PAULIS)
    return FrameCatalog(kind=FrameKind.PAULI, n_qubits=n_qubits, local_set=local)


def build_ext_pauli_catalog(a: float, n_qubits: int) -> FrameCatalog:
    return FrameCatalog(
        kind=FrameKind.EXT_PAULI,
        n_qubits=n_qubits,
        local_set=tuple(build_ext_pauli_local_set(a)),
        hyper_a=float(a),
    )


def catalog_from_manifest(manifest: dict) -> FrameCatalog:
    """Rebuild a catalog from its manifest (exact for random product frames)."""
    kind = FrameKind(manifest["kind"])
    n = int(manifest["n_qubits"])
    if kind is FrameKind.DIAG_STAB:
        return build_diag_stab_catalog(n)
    if kind is FrameKind.DYAD_STAB:
        return build_dyad_stab_catalog(n)
    if kind is FrameKind.PAULI:
        return build_pauli_catalog(n)
    if kind is FrameKind.EXT_PAULI:
        return build_ext_pauli_catalog(float(manifest["hyper_a"]), n)
    if "local_states" in manifest:
        local = []
        for amps in manifest["local_states"]:
            ket = np.array([complex(re, im) for re, im in amps])
            local.append(DenseOperator(np.outer(ket, ket.conj()), hermitian=True))
        return FrameCatalog(
            kind=FrameKind.PRODUCT,
            n_qubits=n,
            local_set=tuple(local),
            seed=manifest.get("seed"),
            extra_random=manifest.get("extra_random"),
        )
    return build_product_catalog(
        int(manifest["extra_random"]), int(manifest["seed"]), n_qubits=n
    )


def build_catalog(kind: FrameKind | str, n_qubits: int, *, hyper_a: float = 0.84,
                  extra_random: int = 24, seed: int = 0) -> FrameCatalog:
    """Convenience dispatcher used by the CLI and the simulator."""
    kind = FrameKind(kind)
    if kind is FrameKind.DIAG_STAB:
        return build_diag_stab_catalog(n_qubits)
    if kind is FrameKind.DYAD_STAB:
        return build_dyad_stab_catalog(n_qubits)
    if kind is FrameKind.PRODUCT:
        return build_product_catalog(extra_random, seed, n_qubits=n_qubits)
    if kind is FrameKind.PAULI:
        return build_pauli_catalog(n_qubits)
    return build_ext_pauli_catalog(hyper_a, n_qubits)


def eval_observable_overlap(catalog: FrameCatalog, label, obs: PauliString) -> complex:
    return catalog.observable_overlap(_payload(label, catalog), obs)


def eval_state_overlap(catalog: FrameCatalog, label, state: ProductState | None = None) -> complex:
    return catalog.state_overlap(_payload(label, catalog), state)


def _payload(label, catalog: FrameCatalog):
    if isinstance(label, FrameElementLabel):
        if label.frame_kind is not catalog.kind:
            raise ValueError(
                f"label of kind {label.frame_kind} used with {catalog.kind} catalog"
            )
        return label.payload
    return label
