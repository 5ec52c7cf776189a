"""Minimal one-norm frame decompositions of channel outputs.

For a channel C, a frame catalog and a picture, the target operators

    C(F_x)    (Schroedinger)    or    C*(F_x)    (Heisenberg)

are expanded over the frame with coefficients of minimal one-norm, producing
per-gate quasi-probability tables whose norm  sup_x ||lambda_x||_1  governs
the Monte Carlo sampling cost.

Because vec(C(E)) = ptm(C) . vec(E) in the Pauli coefficient representation,
all targets for a table are obtained by one matrix product against the
dictionary, and the per-input optimizations share one factorized solver.

Three decomposition routes exist:

* Pauli catalog: the frame is an orthogonal basis, so the (unique)
  decomposition is read off the transfer matrix — no optimization.
* probabilistic-Clifford channels on stabilizer catalogs: every Kraus
  operator is proportional to a unitary that permutes the catalog, so the
  convex mixture over permuted elements is an exact decomposition with
  one-norm <= 1 (optimal for trace-one inputs, where the trace itself is a
  matching dual bound).
* everything else: batched basis-pursuit solves.  For stabilizer catalogs
  the inputs are first grouped into orbits of catalog-preserving symmetries
  that commute with the channel (verified numerically at build time); one
  representative per orbit is solved and the optimum is transported along
  the orbit, which preserves one-norms exactly.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

from .frames import (
    PRODUCT_SHAPED,
    STABILIZER_KINDS,
    FrameCatalog,
    FrameKind,
    canonical_phase,
)
from .operators import (
    H_MATRIX,
    S_MATRIX,
    NoisyChannel,
    _RawKrausMap,
    _ptm_from_kraus,
    adjoint as channel_adjoint,
    embed_channel,
    pauli_vectorize,
)
from .solver import BasisPursuitSolver, SolveOutcome, SolverFailure, SolverOptions

RESIDUAL_TOL = 1e-8
GAP_TOL = 1e-6
PRUNE_TOL = 1e-10

SCHRODINGER = "schrodinger"
HEISENBERG = "heisenberg"
PICTURES = (SCHRODINGER, HEISENBERG)


# ---------------------------------------------------------------------------
# dictionaries


@dataclass
class Dictionary:
    """Columns are the Pauli coefficient vectors of the catalog elements."""

    columns: np.ndarray
    kind: FrameKind
    n_qubits: int
    labels: tuple
    _solver: BasisPursuitSolver = field(default=None, repr=False)

    @property
    def solver(self) -> BasisPursuitSolver:
        if self._solver is None:
            self._solver = BasisPursuitSolver(self.columns)
        return self._solver

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.columns, tol=1e-9))


_dictionary_cache: dict = {}


def build_dictionary(catalog: FrameCatalog, q: int | None = None) -> Dictionary:
    """Dictionary of the q-qubit restriction of a catalog (default: as built)."""
    cat = catalog if q is None or q == catalog.n_qubits else catalog.restrict(q)
    key = (cat.kind, cat.n_qubits, cat.manifest_hash())
    hit = _dictionary_cache.get(key)
    if hit is not None:
        return hit
    labels = tuple(cat.labels())
    if cat.is_product_shaped:
        # vec(f_1 (x) ... (x) f_q) factorizes, so the dictionary is a Kronecker
        # power of the local 4 x L coefficient table (lexicographic label order).
        local = np.stack([pauli_vectorize(f.entries) for f in cat.local_set]).T
        cols = reduce(np.kron, [local] * cat.n_qubits)
    else:
        vecs = cat.state_vectors
        basis_q = _pauli_basis_cached(cat.n_qubits)
        if cat.kind is FrameKind.DIAG_STAB:
            cols = np.einsum("pkl,xl,xk->px", basis_q, vecs, vecs.conj()) / (2**cat.n_qubits)
        else:
            pairwise = np.einsum("pkl,il,jk->pij", basis_q, vecs, vecs.conj())
            cols = pairwise.reshape(4**cat.n_qubits, -1) / (2**cat.n_qubits)
    if np.abs(cols.imag).max() < 1e-14:
        cols = np.ascontiguousarray(cols.real)
    cols.setflags(write=False)
    out = Dictionary(columns=cols, kind=cat.kind, n_qubits=cat.n_qubits, labels=labels)
    _dictionary_cache[key] = out
    return out


@lru_cache(maxsize=8)
def _pauli_basis_cached(q):
    from .operators import pauli_basis

    return pauli_basis(q)


# ---------------------------------------------------------------------------
# result types


@dataclass
class Decomposition:
    """Support, coefficients and one-norm of one frame expansion."""

    support: tuple
    coeffs: np.ndarray
    one_norm: float
    residual: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        recomputed = float(np.abs(self.coeffs).sum())
        if abs(recomputed - self.one_norm) > 1e-12 + 1e-12 * recomputed:
            raise ValueError("one_norm does not match the coefficient moduli")

    @property
    def phases(self) -> np.ndarray:
        mags = np.abs(self.coeffs)
        return self.coeffs / np.where(mags > 0, mags, 1.0)


@dataclass(frozen=True)
class DualCertificate:
    """Lagrange dual evidence: dual_objective lower-bounds the true optimum."""

    dual_objective: float
    primal_objective: float
    feasibility_residual: float

    @property
    def gap(self) -> float:
        return self.primal_objective - self.dual_objective

    @property
    def certified(self) -> bool:
        return self.gap <= GAP_TOL and self.feasibility_residual <= RESIDUAL_TOL


@dataclass
class TableRow:
    decomposition: Decomposition
    certificate: DualCertificate
    probs: np.ndarray
    cdf: np.ndarray

    @property
    def one_norm(self) -> float:
        return self.decomposition.one_norm


@dataclass
class QuasiProbTable:
    """Per-input optimal decompositions of one noisy gate over a catalog."""

    gate_id: str
    picture: str
    frame_manifest: dict
    rows: dict
    table_norm: float
    method: str
    targets: tuple = ()

    def row(self, label) -> TableRow:
        return self.rows[label]

    @property
    def certified(self) -> bool:
        return all(r.certificate.certified for r in self.rows.values())

    @property
    def max_gap(self) -> float:
        return max((r.certificate.gap for r in self.rows.values()), default=0.0)

    def export_dict(self) -> dict:
        rows = []
        for label, row in self.rows.items():
            rows.append(
                {
                    "label": _label_json(label),
                    "support": [_label_json(s) for s in row.decomposition.support],
                    "coeffs": [[float(c.real), float(c.imag)] for c in row.decomposition.coeffs],
                    "one_norm": float(row.one_norm),
                    "residual": float(row.decomposition.residual),
                    "dual_objective": float(row.certificate.dual_objective),
                    "gap": float(row.certificate.gap),
                    "certified": bool(row.certificate.certified),
                }
            )
        return {
            "gate": self.gate_id,
            "picture": self.picture,
            "frame": self.frame_manifest,
            "method": self.method,
            "table_norm": float(self.table_norm),
            "rows": rows,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.export_dict(), **kwargs)


def _label_json(label):
    if isinstance(label, tuple):
        return list(int(x) for x in label)
    return int(label)


def _label_from_json(value):
    if isinstance(value, list):
        return tuple(int(x) for x in value)
    return int(value)


def table_from_json(text: str) -> dict:
    """Parsed table export with labels restored to their native form."""
    data = json.loads(text)
    for row in data["rows"]:
        row["label"] = _label_from_json(row["label"])
        row["support"] = [_label_from_json(s) for s in row["support"]]
        row["coeffs"] = [complex(re, im) for re, im in row["coeffs"]]
    return data


# ---------------------------------------------------------------------------
# spec-level solve wrappers


def solve_min_one_norm(
    dictionary: Dictionary, y: np.ndarray, options: SolverOptions | None = None
) -> tuple[Decomposition, DualCertificate]:
    """Minimum one-norm expansion of a Pauli-coefficient target over a dictionary."""
    outcome = dictionary.solver.solve(np.asarray(y, dtype=complex), options)
    return _outcome_to_row_parts(dictionary, outcome)


def _outcome_to_row_parts(dictionary: Dictionary, outcome: SolveOutcome):
    idx = np.flatnonzero(np.abs(outcome.coeffs) > 0)
    support = tuple(dictionary.labels[i] for i in idx)
    dec = Decomposition(
        support=support,
        coeffs=outcome.coeffs[idx],
        one_norm=outcome.one_norm,
        residual=outcome.residual,
    )
    cert = DualCertificate(
        dual_objective=outcome.dual_objective,
        primal_objective=outcome.one_norm,
        feasibility_residual=outcome.residual,
    )
    return dec, cert


def verify_decomposition(dictionary: Dictionary, y: np.ndarray, dec: Decomposition):
    """Independent re-check: recomputes the residual and one-norm from scratch."""
    pos = {label: i for i, label in enumerate(dictionary.labels)}
    cols = np.array([pos[s] for s in dec.support], dtype=int)
    if cols.size:
        recon = dictionary.columns[:, cols] @ dec.coeffs
    else:
        recon = np.zeros(dictionary.columns.shape[0], dtype=complex)
    residual = float(np.linalg.norm(recon - np.asarray(y, dtype=complex)))
    one_norm = float(np.abs(dec.coeffs).sum())
    ok = residual <= RESIDUAL_TOL and abs(one_norm - dec.one_norm) <= 1e-10
    return ok, {"residual": residual, "one_norm": one_norm}


# ---------------------------------------------------------------------------
# catalog-preserving symmetries of stabilizer inputs


@lru_cache(maxsize=1)
def clifford_unitaries_1q() -> tuple:
    """The 24 single-qubit Clifford unitaries (canonical global phase)."""

    def canon(m):
        flat = m.reshape(-1)
        for a in flat:
            if abs(a) > 1e-10:
                m = m * (a.conjugate() / abs(a))
                break
        return m

    def key(m):
        return tuple(np.round(m.reshape(-1).view(float), 9))

    seen = {key(np.eye(2, dtype=complex)): np.eye(2, dtype=complex)}
    frontier = list(seen.values())
    while frontier:
        nxt = []
        for m in frontier:
            for g in (H_MATRIX, S_MATRIX):
                w = canon(g @ m)
                k = key(w)
                if k not in seen:
                    seen[k] = w
                    nxt.append(w)
        frontier = nxt
    assert len(seen) == 24
    return tuple(seen.values())


def _state_permutation(unitary: np.ndarray, vecs: np.ndarray):
    """How a unitary permutes canonical state vectors: W v_i = e^{i theta_i} v_{sigma_i}.

    Returns (sigma, theta) or None if some image is not in the set.
    """
    from .frames import _vec_key

    index = {_vec_key(v): i for i, v in enumerate(vecs)}
    transformed = vecs @ unitary.T
    sigma = np.empty(len(vecs), dtype=int)
    theta = np.empty(len(vecs))
    for i, w in enumerate(transformed):
        cw = canonical_phase(w)
        j = index.get(_vec_key(cw))
        if j is None:
            return None
        inner = vecs[j].conj() @ w
        if abs(abs(inner) - 1.0) > 1e-9:
            return None
        sigma[i] = j
        theta[i] = float(np.angle(inner))
    return sigma, theta


class _OrbitReduction:
    """Orbit partition of stabilizer inputs under verified channel symmetries."""

    def __init__(self, catalog: FrameCatalog, generators: list):
        self.catalog = catalog
        self.n_states = catalog.n_states
        n_labels = catalog.size()
        self.rep_of = np.arange(n_labels)
        # group elements as (sigma, theta) state maps; element 0 is identity
        self.elements = [(np.arange(self.n_states), np.zeros(self.n_states))]
        self.elem_of = np.zeros(n_labels, dtype=int)
        self._build(generators)

    def _label_map(self, sigma):
        if self.catalog.kind is FrameKind.DIAG_STAB:
            return sigma
        s = self.n_states
        grid_i, grid_j = np.divmod(np.arange(s * s), s)
        return sigma[grid_i] * s + sigma[grid_j]

    def _build(self, generators):
        n_labels = self.rep_of.size
        visited = np.zeros(n_labels, dtype=bool)
        elem_keys = {self._elem_key(*self.elements[0]): 0}
        label_maps = [self._label_map(sig) for sig, _ in generators]
        for start in range(n_labels):
            if visited[start]:
                continue
            visited[start] = True
            self.rep_of[start] = start
            self.elem_of[start] = 0
            frontier = [start]
            while frontier:
                nxt = []
                for lab in frontier:
                    e_idx = self.elem_of[lab]
                    sig_e, th_e = self.elements[e_idx]
                    for (sig_g, th_g), lmap in zip(generators, label_maps):
                        new_lab = int(lmap[lab])
                        if visited[new_lab]:
                            continue
                        visited[new_lab] = True
                        sig_n = sig_g[sig_e]
                        th_n = th_e + th_g[sig_e]
                        key = self._elem_key(sig_n, th_n)
                        idx = elem_keys.get(key)
                        if idx is None:
                            idx = len(self.elements)
                            self.elements.append((sig_n, th_n))
                            elem_keys[key] = idx
                        self.rep_of[new_lab] = start
                        self.elem_of[new_lab] = idx
                        nxt.append(new_lab)
                frontier = nxt

    @staticmethod
    def _elem_key(sigma, theta):
        return sigma.tobytes() + np.round(np.mod(theta, 2 * math.pi), 8).tobytes()

    @property
    def representatives(self) -> np.ndarray:
        return np.unique(self.rep_of)

    def transport_row(self, rep_label: int, label: int, support_idx: np.ndarray, coeffs: np.ndarray):
        """Map a representative's decomposition onto another orbit member."""
        sigma, theta = self.elements[self.elem_of[label]]
        if self.catalog.kind is FrameKind.DIAG_STAB:
            return sigma[support_idx], coeffs
        s = self.n_states
        sup_i, sup_j = np.divmod(support_idx, s)
        new_support = sigma[sup_i] * s + sigma[sup_j]
        a0, b0 = divmod(int(rep_label), s)
        rel_phase = np.exp(1j * (theta[sup_i] - theta[sup_j] - theta[a0] + theta[b0]))
        return new_support, coeffs * rel_phase


def _symmetry_generators(catalog: FrameCatalog, local_map_eff: np.ndarray, targets: tuple):
    """Register unitaries that provably commute with the embedded channel and
    permute the catalog: arbitrary Cliffords on spectator qubits, plus the
    single-qubit Cliffords whose conjugation commutes with the local action."""
    from .operators import embed_operator

    q_r = catalog.n_qubits
    vecs = catalog.state_vectors
    gens = []
    for k in range(q_r):
        if k in targets:
            continue
        for g in (H_MATRIX, S_MATRIX):
            perm = _state_permutation(embed_operator(g, (k,), q_r), vecs)
            assert perm is not None
            gens.append(perm)
    if len(targets) == 1:
        for v in clifford_unitaries_1q():
            conj_ptm = _ptm_from_kraus([v])
            if np.abs(conj_ptm @ local_map_eff - local_map_eff @ conj_ptm).max() > 1e-11:
                continue
            perm = _state_permutation(embed_operator(v, targets, q_r), vecs)
            if perm is not None:
                gens.append(perm)
    return gens


# ---------------------------------------------------------------------------
# probabilistic-Clifford (mixture) route


def _unitary_mixture_terms(channel: NoisyChannel, picture: str):
    """(weight, conjugating unitary) terms if every Kraus op is prop. to a unitary."""
    dim = channel.dim
    terms = []
    for k in channel.kraus:
        gram = k.entries.conj().T @ k.entries
        w = float(np.trace(gram).real) / dim
        if w < 1e-14:
            continue
        if np.abs(gram - w * np.eye(dim)).max() > 1e-12:
            return None
        u = k.entries / math.sqrt(w)
        terms.append((w, u.conj().T if picture == HEISENBERG else u))
    return terms or None


def _mixture_rows(catalog: FrameCatalog, terms, labels):
    """Exact mixture decompositions over a stabilizer catalog, or None if a
    term's unitary does not preserve the catalog."""
    vecs = catalog.state_vectors
    maps = []
    for w, u in terms:
        perm = _state_permutation(u, vecs)
        if perm is None:
            return None
        maps.append((w, perm[0], perm[1]))
    s = catalog.n_states
    rows = {}
    for label in labels:
        if catalog.kind is FrameKind.DIAG_STAB:
            acc: dict[int, complex] = {}
            for w, sigma, _ in maps:
                y = int(sigma[label])
                acc[y] = acc.get(y, 0.0) + w
        else:
            i, j = divmod(int(label), s)
            acc = {}
            for w, sigma, theta in maps:
                y = int(sigma[i]) * s + int(sigma[j])
                acc[y] = acc.get(y, 0.0) + w * np.exp(1j * (theta[i] - theta[j]))
        support = np.array(sorted(acc), dtype=int)
        coeffs = np.array([acc[y] for y in support], dtype=complex)
        keep = np.abs(coeffs) > PRUNE_TOL
        rows[label] = (support[keep], coeffs[keep])
    return rows


# ---------------------------------------------------------------------------
# gate-action decomposition and tables


def effective_transfer_matrix(channel: NoisyChannel, picture: str) -> np.ndarray:
    """Pauli transfer matrix of the channel (Schroedinger) or its adjoint."""
    if picture not in PICTURES:
        raise ValueError(f"picture must be one of {PICTURES}")
    return channel.ptm if picture == SCHRODINGER else channel.ptm.T


def _embedded_channel(gate: NoisyChannel, catalog: FrameCatalog, targets: tuple | None):
    q = gate.dim_qubits
    n_r = catalog.n_qubits
    if targets is None:
        targets = tuple(range(n_r - q, n_r))
    if len(targets) != q:
        raise ValueError("gate arity does not match target count")
    if n_r == q and targets == tuple(range(q)):
        return gate, targets
    return embed_channel(gate, targets, n_r), targets


def restricted_catalog_for_gate(gate: NoisyChannel, catalog: FrameCatalog) -> FrameCatalog:
    """The register the canonical per-gate optimization runs over.

    Product-shaped frames decompose a gate's action locally on its own q
    qubits.  Stabilizer frames use the (q+1)-qubit catalog for single-qubit
    gates (with the gate embedded next to an identity spectator), which is
    proven to realize the optimum achievable on any larger register; the
    catalogs are enumerable up to 2 qubits, so two-qubit gates are carried by
    the 2-qubit catalog itself (sufficient for the Clifford mixtures the
    gate-set needs).
    """
    q = gate.dim_qubits
    if catalog.kind in PRODUCT_SHAPED:
        return catalog.restrict(q)
    if q > 2:
        raise ValueError("stabilizer tables support gates on at most 2 qubits")
    return catalog.restrict(2)


def decompose_gate_action(
    gate: NoisyChannel,
    catalog: FrameCatalog,
    picture: str,
    input_label,
    targets: tuple | None = None,
    options: SolverOptions | None = None,
) -> Decomposition:
    """Optimal expansion of the (adjoint) gate action on one input element."""
    table = build_quasiprob_table(
        gate, catalog, picture, targets=targets, inputs=[_norm_label(input_label, catalog)],
        options=options,
    )
    return table.rows[_norm_label(input_label, catalog)].decomposition


def _norm_label(label, catalog: FrameCatalog):
    from .frames import FrameElementLabel

    if isinstance(label, FrameElementLabel):
        label = label.payload
    if catalog.kind is FrameKind.DYAD_STAB and isinstance(label, tuple):
        return catalog.dyad_index(label)
    if catalog.is_product_shaped and not isinstance(label, tuple):
        return (int(label),)
    return label


def build_quasiprob_table(
    gate: NoisyChannel,
    catalog: FrameCatalog,
    picture: str,
    *,
    targets: tuple | None = None,
    gate_id: str = "",
    method: str = "auto",
    inputs=None,
    options: SolverOptions | None = None,
) -> QuasiProbTable:
    """Decompositions of one noisy gate for every catalog input label.

    ``catalog`` is the register the table runs over (use
    :func:`restricted_catalog_for_gate` for the canonical per-gate register);
    ``targets`` places the gate inside that register (default: last qubits).
    """
    if picture not in PICTURES:
        raise ValueError(f"picture must be one of {PICTURES}")
    if catalog.kind in PRODUCT_SHAPED and catalog.n_qubits != gate.dim_qubits:
        raise ValueError(
            "product-shaped tables are local: restrict the catalog to the gate size"
        )
    channel, targets = _embedded_channel(gate, catalog, targets)
    labels = list(catalog.labels()) if inputs is None else list(inputs)
    dictionary = build_dictionary(catalog)
    label_pos = {label: i for i, label in enumerate(dictionary.labels)}

    transfer = effective_transfer_matrix(channel, picture)
    Y = transfer @ dictionary.columns

    rows: dict = {}
    used_method = "solve"
    if method in ("auto", "mixture") and catalog.kind in STABILIZER_KINDS:
        terms = _unitary_mixture_terms(channel, picture)
        if terms is not None:
            mix = _mixture_rows(catalog, terms, [label_pos[l] for l in labels])
            if mix is not None:
                used_method = "mixture"
                for label in labels:
                    support_idx, coeffs = mix[label_pos[label]]
                    y = Y[:, label_pos[label]]
                    rows[label] = _assemble_row_from_indices(
                        dictionary, support_idx, coeffs, y, dual_hint="trace"
                    )
    if method == "mixture" and used_method != "mixture":
        raise ValueError("channel is not a catalog-preserving unitary mixture")

    if not rows:
        if catalog.kind is FrameKind.PAULI:
            used_method = "transfer-matrix"
            for label in labels:
                col = Y[:, label_pos[label]]
                support_idx = np.flatnonzero(np.abs(col) > PRUNE_TOL)
                rows[label] = _assemble_row_from_indices(
                    dictionary, support_idx, col[support_idx], col, dual_hint="exact"
                )
        else:
            rows = _solve_rows(dictionary, catalog, channel, picture, labels, label_pos, Y,
                               options, targets)

    table_norm = max((r.one_norm for r in rows.values()), default=0.0)
    manifest = catalog.manifest()
    return QuasiProbTable(
        gate_id=gate_id,
        picture=picture,
        frame_manifest=manifest,
        rows=rows,
        table_norm=table_norm,
        method=used_method,
        targets=targets,
    )


def _solve_rows(dictionary, catalog, channel, picture, labels, label_pos, Y,
                options, targets):
    reduction = None
    if catalog.kind in STABILIZER_KINDS:
        local = _local_action_ptm(channel, picture, catalog.n_qubits, targets)
        gens = _symmetry_generators(catalog, local, targets) if local is not None else []
        if gens:
            reduction = _OrbitReduction(catalog, gens)

    wanted_idx = np.array([label_pos[l] for l in labels], dtype=int)
    if reduction is not None:
        rep_idx = np.unique(reduction.rep_of[wanted_idx])
    else:
        rep_idx = wanted_idx

    outcomes = dictionary.solver.solve_batch(Y[:, rep_idx], options)

    rep_rows = {}
    for i, out in zip(rep_idx, outcomes):
        support_idx = np.flatnonzero(np.abs(out.coeffs) > 0)
        rep_rows[int(i)] = (support_idx, out.coeffs[support_idx], out)

    rows = {}
    for label in labels:
        li = label_pos[label]
        if reduction is not None:
            rep = int(reduction.rep_of[li])
            support_idx, coeffs, out = rep_rows[rep]
            if li != rep:
                support_idx, coeffs = reduction.transport_row(rep, li, support_idx, coeffs)
                order = np.argsort(support_idx)
                support_idx, coeffs = support_idx[order], coeffs[order]
        else:
            support_idx, coeffs, out = rep_rows[int(li)]
        rows[label] = _assemble_row(dictionary, support_idx, coeffs, out)
    return rows


def _local_action_ptm(channel, picture, n_r, targets):
    """PTM of the channel's local action on its target qubit (1q gates only)."""
    if len(targets) != 1:
        return None
    # recover the local 1q map by contracting the embedded PTM on identity
    # spectators: rows/cols where all non-target Pauli digits are I
    t = targets[0]
    idx = []
    for p in range(4):
        digits = [0] * n_r
        digits[t] = p
        flat = 0
        for dgt in digits:
            flat = flat * 4 + dgt
        idx.append(flat)
    m = effective_transfer_matrix(channel, picture)
    return m[np.ix_(idx, idx)]


def _assemble_row(dictionary, support_idx, coeffs, outcome: SolveOutcome) -> TableRow:
    dec = Decomposition(
        support=tuple(dictionary.labels[i] for i in support_idx),
        coeffs=coeffs,
        one_norm=float(np.abs(coeffs).sum()),
        residual=outcome.residual,
    )
    cert = DualCertificate(
        dual_objective=outcome.dual_objective,
        primal_objective=dec.one_norm,
        feasibility_residual=outcome.residual,
    )
    return _finish_row(dec, cert)


def _assemble_row_from_indices(dictionary, support_idx, coeffs, y, dual_hint: str) -> TableRow:
    support_idx = np.asarray(support_idx, dtype=int)
    coeffs = np.asarray(coeffs, dtype=complex)
    if support_idx.size:
        residual = float(np.linalg.norm(dictionary.columns[:, support_idx] @ coeffs - y))
    else:
        residual = float(np.linalg.norm(y))
    one_norm = float(np.abs(coeffs).sum())
    if dual_hint == "exact":
        dual = one_norm
    else:
        # |tr(target)| read off the identity Pauli coordinate: a feasible dual
        # point whenever every catalog element has |tr F_m| <= 1, so it is a
        # rigorous lower bound (and it closes the gap on trace-one inputs).
        dual = min(float(abs(y[0])) * 2 ** _log_dim(dictionary), one_norm)
    dec = Decomposition(
        support=tuple(dictionary.labels[i] for i in support_idx),
        coeffs=coeffs,
        one_norm=one_norm,
        residual=residual,
    )
    cert = DualCertificate(
        dual_objective=dual,
        primal_objective=one_norm,
        feasibility_residual=residual,
    )
    return _finish_row(dec, cert)


def _log_dim(dictionary) -> int:
    return int(round(math.log2(dictionary.columns.shape[0]) / 2))


def _finish_row(dec: Decomposition, cert: DualCertificate) -> TableRow:
    mags = np.abs(dec.coeffs)
    total = mags.sum()
    if total > 0:
        probs = mags / total
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
    else:
        probs = mags
        cdf = mags
    return TableRow(decomposition=dec, certificate=cert, probs=probs, cdf=cdf)
