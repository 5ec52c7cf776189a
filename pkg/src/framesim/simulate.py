"""Monte Carlo estimation of noisy-circuit expectation values.

The estimator follows the quasi-probability frame protocol: starting from the
trivial decomposition of the initial state (Schroedinger) or of the Pauli
observable (Heisenberg), a path of frame labels is sampled through the
per-gate conditional distributions p(y|x) = |lambda_xy| / sum |lambda_xy'|,
and each path contributes

    E = (final overlap) * (product of coefficient phases)
                        * (product of per-step one-norms).

The sample count for additive precision epsilon at confidence 1-delta comes
from the Hoeffding bound  N = ceil(2 log(2/delta) / epsilon^2 * |E|^2)  with
|E| bounded by the product of table norms.

Two oracles close the loop: a dense density-matrix evolution (the ground
truth for every acceptance test) and an exact full-path summation that must
agree with it to 1e-10 whenever the path space is small enough to enumerate.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import decompose
from .decompose import (
    HEISENBERG,
    PICTURES,
    SCHRODINGER,
    QuasiProbTable,
    build_quasiprob_table,
)
from .frames import (
    PRODUCT_SHAPED,
    STABILIZER_KINDS,
    FrameCatalog,
    FrameKind,
    build_catalog,
    _vec_key,
    canonical_phase,
)
from .operators import (
    MAX_ORACLE_QUBITS,
    NoisyChannel,
    PauliString,
    ProductState,
    apply_channel,
    compose_noisy_gate,
    kron_all,
    make_gate,
    make_noise,
)

PICTURE_OF_KIND = {
    FrameKind.DIAG_STAB: SCHRODINGER,
    FrameKind.DYAD_STAB: SCHRODINGER,
    FrameKind.PRODUCT: SCHRODINGER,
    FrameKind.PAULI: HEISENBERG,
    FrameKind.EXT_PAULI: HEISENBERG,
}

STAB_REGISTER_LIMITS = {FrameKind.DIAG_STAB: 3, FrameKind.DYAD_STAB: 2}


@dataclass(frozen=True)
class GateApplication:
    """One noisy gate in a circuit: named unitary plus optional local noise."""

    name: str
    qubits: tuple
    noise_model: str = None
    noise_strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    def channel(self) -> NoisyChannel:
        gate = make_gate(self.name)
        if gate.dim_qubits != len(self.qubits):
            raise ValueError(
                f"gate {self.name} acts on {gate.dim_qubits} qubits, got {self.qubits}"
            )
        if self.noise_model is None or self.noise_strength == 0.0:
            if self.noise_model is not None:
                make_noise(self.noise_model, self.noise_strength)  # validate range
            return gate
        noise = make_noise(self.noise_model, self.noise_strength)
        return compose_noisy_gate(gate, noise, per_qubit=True)

    def key(self):
        return (self.name, self.noise_model, self.noise_strength)

    def describe(self) -> str:
        if self.noise_model:
            return f"{self.name}+{self.noise_model}({self.noise_strength:g})"
        return self.name


@dataclass
class Circuit:
    """An ordered noisy circuit with a Pauli observable to estimate."""

    n_qubits: int
    gates: list
    observable: PauliString
    initial_state: ProductState = None

    def __post_init__(self):
        for app in self.gates:
            if len(set(app.qubits)) != len(app.qubits):
                raise ValueError(f"repeated qubit in {app}")
            if any(q < 0 or q >= self.n_qubits for q in app.qubits):
                raise ValueError(f"qubit index out of range in {app}")
        if self.observable.n_qubits != self.n_qubits:
            raise ValueError("observable length must match the register")
        if abs(self.observable.phase.imag) > 1e-12:
            raise ValueError("observable must carry a real sign (Hermitian)")
        if self.initial_state is not None and self.initial_state.n_qubits != self.n_qubits:
            raise ValueError("initial state length must match the register")

    @property
    def state(self) -> ProductState:
        return self.initial_state or ProductState.zero(self.n_qubits)


# ---------------------------------------------------------------------------
# circuit files


def circuit_to_dict(circuit: Circuit) -> dict:
    sign = "-" if circuit.observable.phase.real < 0 else "+"
    out = {
        "n_qubits": circuit.n_qubits,
        "initial_state": "zero"
        if circuit.initial_state is None
        else [[[float(a.real), float(a.imag)] for a in ket] for ket in circuit.initial_state.kets],
        "observable": sign + circuit.observable.letters,
        "gates": [
            {
                "name": g.name,
                "qubits": list(g.qubits),
                **(
                    {"noise": {"model": g.noise_model, "strength": g.noise_strength}}
                    if g.noise_model
                    else {}
                ),
            }
            for g in circuit.gates
        ],
    }
    return out


def circuit_from_dict(data: dict) -> Circuit:
    obs = data["observable"]
    if isinstance(obs, str):
        sign = 1.0
        if obs and obs[0] in "+-":
            sign = -1.0 if obs[0] == "-" else 1.0
            obs = obs[1:]
        observable = PauliString(obs, sign)
    else:
        observable = PauliString(obs["letters"], float(obs.get("sign", 1)))
    initial = data.get("initial_state", "zero")
    state = None
    if initial not in (None, "zero"):
        kets = tuple(np.array([complex(re, im) for re, im in ket]) for ket in initial)
        state = ProductState(kets)
    gates = []
    for g in data["gates"]:
        noise = g.get("noise") or {}
        gates.append(
            GateApplication(
                name=g["name"],
                qubits=tuple(g["qubits"]),
                noise_model=noise.get("model"),
                noise_strength=float(noise.get("strength", 0.0)),
            )
        )
    return Circuit(
        n_qubits=int(data["n_qubits"]),
        gates=gates,
        observable=observable,
        initial_state=state,
    )


def circuit_to_json(circuit: Circuit, **kwargs) -> str:
    return json.dumps(circuit_to_dict(circuit), **kwargs)


def circuit_from_json(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# exact oracle


def exact_expectation(circuit: Circuit) -> float:
    """Dense density-matrix evolution: tr[O C_m o ... o C_1(rho_0)]."""
    if circuit.n_qubits > MAX_ORACLE_QUBITS:
        raise ValueError(
            f"dense oracle supports at most {MAX_ORACLE_QUBITS} qubits, got {circuit.n_qubits}"
        )
    rho = circuit.state.density_matrix()
    for app in circuit.gates:
        rho = apply_channel(app.channel(), app.qubits, rho).entries
    value = complex(np.einsum("kl,lk->", circuit.observable.matrix(), rho))
    if abs(value.imag) > 1e-9:
        raise ArithmeticError(f"expectation of a Hermitian observable came out complex: {value}")
    return float(value.real)


# ---------------------------------------------------------------------------
# sample planning


def plan_samples(e_bound: float, epsilon: float, delta: float) -> int:
    """Hoeffding count: ceil(2 log(2/delta) / epsilon^2 * e_bound^2)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if e_bound < 0:
        raise ValueError("e_bound must be nonnegative")
    if e_bound == 0:
        return 0
    return math.ceil(2.0 * math.log(2.0 / delta) / epsilon**2 * e_bound**2)


def bound_E(tables, initial_norm: float, final_overlap_bound: float) -> float:
    """|E| bound: initial norm x product of table norms x final overlap bound."""
    out = float(initial_norm)
    for t in tables:
        out *= t.table_norm if isinstance(t, QuasiProbTable) else float(t)
    return out * float(final_overlap_bound)


# ---------------------------------------------------------------------------
# sampling plans


@dataclass
class _Step:
    table: QuasiProbTable
    qubits: tuple
    local: bool  # product-shaped: state is a tuple of local indices

    def input_label(self, state):
        if self.local:
            return tuple(state[q] for q in self.qubits)
        return state

    def advance(self, state, out_label):
        if self.local:
            state = list(state)
            for q, v in zip(self.qubits, out_label):
                state[q] = v
            return tuple(state)
        return out_label


@dataclass
class SamplingPlan:
    """Everything one needs to draw paths: tables, initial label, bounds."""

    circuit: Circuit
    catalog: FrameCatalog
    picture: str
    steps: list
    initial_label: object
    initial_coeff: complex
    overlap_bound: float
    e_bound: float

    def final_overlap(self, state) -> complex:
        label = tuple(state) if self.catalog.is_product_shaped else state
        if self.picture == SCHRODINGER:
            return self.catalog.observable_overlap(label, self.circuit.observable)
        return self.catalog.state_overlap(label, self.circuit.state)


def _observable_bound(catalog: FrameCatalog, obs: PauliString) -> float:
    if catalog.is_product_shaped:
        table = np.abs(catalog._local_pauli_overlaps)
        return float(np.prod([table[:, p].max() for p in obs.indices]))
    vecs = catalog.state_vectors
    w = vecs.conj() @ obs.matrix() @ vecs.T
    if catalog.kind is FrameKind.DIAG_STAB:
        return float(np.abs(np.diag(w)).max())
    return float(np.abs(w).max())


def _state_bound(catalog: FrameCatalog, state: ProductState) -> float:
    if catalog.is_product_shaped:
        out = 1.0
        for ket in state.kets:
            vals = [abs(ket.conj() @ (f.entries @ ket)) for f in catalog.local_set]
            out *= max(vals)
        return float(out)
    psi = kron_all([k.reshape(2, 1) for k in state.kets]).reshape(-1)
    amps = np.abs(catalog.state_vectors.conj() @ psi)
    if catalog.kind is FrameKind.DIAG_STAB:
        return float((amps**2).max())
    return float(np.outer(amps, amps).max())


def _initial_point_mass(circuit: Circuit, catalog: FrameCatalog, picture: str):
    if picture == HEISENBERG:
        return tuple(circuit.observable.indices), complex(circuit.observable.phase)
    state = circuit.state
    if catalog.is_product_shaped:
        kets = [canonical_phase(k) for k in state.kets]
        local_kets = {
            _vec_key(_projector_ket(f.entries)): j for j, f in enumerate(catalog.local_set)
        }
        label = []
        for ket in kets:
            j = local_kets.get(_vec_key(ket))
            if j is None:
                raise ValueError(
                    "initial product state has a local factor outside the frame's local set"
                )
            label.append(j)
        return tuple(label), 1.0 + 0j
    psi = canonical_phase(kron_all([k.reshape(2, 1) for k in state.kets]).reshape(-1))
    index = {_vec_key(v): i for i, v in enumerate(catalog.state_vectors)}
    i = index.get(_vec_key(psi))
    if i is None:
        raise ValueError("initial state is not a stabilizer catalog element")
    if catalog.kind is FrameKind.DIAG_STAB:
        return int(i), 1.0 + 0j
    return catalog.dyad_index((i, i)), 1.0 + 0j


def _projector_ket(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    return canonical_phase(vecs[:, int(np.argmax(vals))])


def prepare_plan(
    circuit: Circuit,
    catalog: FrameCatalog,
    picture: str,
    options=None,
) -> SamplingPlan:
    """Build per-gate tables and the initial decomposition for a circuit."""
    if picture not in PICTURES:
        raise ValueError(f"picture must be one of {PICTURES}")
    expected = PICTURE_OF_KIND[catalog.kind]
    if picture != expected:
        raise ValueError(
            f"{catalog.kind.value} frames support the {expected} picture only: "
            "state-shaped frames evolve the state forward, operator-shaped "
            "frames back-propagate the observable"
        )
    if catalog.n_qubits != circuit.n_qubits:
        raise ValueError("catalog register size must match the circuit")
    limit = STAB_REGISTER_LIMITS.get(catalog.kind)
    if limit is not None and circuit.n_qubits > limit:
        raise ValueError(
            f"{catalog.kind.value} estimation holds frame elements densely and "
            f"supports at most {limit} qubits"
        )

    is_local = catalog.is_product_shaped
    table_cache: dict = {}
    steps = []
    ordered = list(circuit.gates)
    if picture == HEISENBERG:
        ordered = ordered[::-1]
    for app in ordered:
        key = app.key() + (app.qubits if not is_local else ())
        table = table_cache.get(key)
        if table is None:
            channel = app.channel()
            if is_local:
                table = build_quasiprob_table(
                    channel,
                    catalog.restrict(channel.dim_qubits),
                    picture,
                    gate_id=app.describe(),
                    options=options,
                )
            else:
                table = build_quasiprob_table(
                    channel,
                    catalog,
                    picture,
                    targets=app.qubits,
                    gate_id=app.describe(),
                    options=options,
                )
            table_cache[key] = table
        steps.append(_Step(table=table, qubits=app.qubits, local=is_local))

    label, coeff = _initial_point_mass(circuit, catalog, picture)
    if picture == SCHRODINGER:
        overlap_bound = _observable_bound(catalog, circuit.observable)
    else:
        overlap_bound = _state_bound(catalog, circuit.state)
    e_bound = bound_E([s.table for s in steps], abs(coeff), overlap_bound)
    return SamplingPlan(
        circuit=circuit,
        catalog=catalog,
        picture=picture,
        steps=steps,
        initial_label=label,
        initial_coeff=coeff,
        overlap_bound=overlap_bound,
        e_bound=e_bound,
    )


# ---------------------------------------------------------------------------
# path sampling


@dataclass
class PathSample:
    labels: tuple
    estimator_value: complex
    per_step_norms: tuple


def sample_path(plan: SamplingPlan, rng: np.random.Generator) -> PathSample:
    """Draw one path of frame labels and evaluate its estimator."""
    state = plan.initial_label
    phase = plan.initial_coeff / abs(plan.initial_coeff)
    norms = [abs(plan.initial_coeff)]
    labels = [state]
    for step in plan.steps:
        row = step.table.rows[step.input_label(state)]
        if row.decomposition.one_norm == 0.0:
            return PathSample(tuple(labels), 0j, tuple(norms + [0.0]))
        idx = int(np.searchsorted(row.cdf, rng.random(), side="left"))
        coeff = row.decomposition.coeffs[idx]
        phase = phase * (coeff / abs(coeff))
        norms.append(row.decomposition.one_norm)
        state = step.advance(state, row.decomposition.support[idx])
        labels.append(state)
    value = plan.final_overlap(state) * phase * float(np.prod(norms))
    return PathSample(tuple(labels), complex(value), tuple(norms))


def enumerate_all_paths(plan: SamplingPlan, max_paths: int = 10**6) -> float:
    """Exact weighted sum over every path (distributed as a label-indexed sweep).

    Must reproduce :func:`exact_expectation` to 1e-10; rejects path spaces
    larger than ``max_paths``.
    """
    amp = {plan.initial_label: complex(plan.initial_coeff)}
    count = {plan.initial_label: 1}
    for step in plan.steps:
        new_amp: dict = {}
        new_count: dict = {}
        for state, a in amp.items():
            row = step.table.rows[step.input_label(state)]
            dec = row.decomposition
            for out_label, coeff in zip(dec.support, dec.coeffs):
                nxt = step.advance(state, out_label)
                new_amp[nxt] = new_amp.get(nxt, 0j) + a * coeff
                new_count[nxt] = new_count.get(nxt, 0) + count[state]
        total = sum(new_count.values())
        if total > max_paths:
            raise ValueError(f"path count {total} exceeds the enumeration cap {max_paths}")
        amp, count = new_amp, new_count
    value = sum(a * plan.final_overlap(state) for state, a in amp.items())
    if abs(value.imag) > 1e-9:
        raise ArithmeticError(f"path sum of a Hermitian observable came out complex: {value}")
    return float(value.real)


# ---------------------------------------------------------------------------
# the estimator


@dataclass
class EstimatorResult:
    mean: float
    n_samples: int
    e_bound: float
    epsilon: float
    delta: float
    empirical_std_error: float
    seed: int
    imag_mean: float = 0.0
    imag_std_error: float = 0.0
    max_abs_estimate: float = 0.0
    frame_manifest_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "n_samples": self.n_samples,
            "e_bound": self.e_bound,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "empirical_std_error": self.empirical_std_error,
            "seed": self.seed,
            "imag_mean": self.imag_mean,
            "imag_std_error": self.imag_std_error,
            "max_abs_estimate": self.max_abs_estimate,
            "frame_manifest_hash": self.frame_manifest_hash,
        }


def estimate(
    circuit: Circuit,
    frame,
    picture: str,
    epsilon: float,
    delta: float,
    seed: int,
    *,
    hyper_a: float = 0.84,
    extra_random: int = 24,
    frame_seed: int = 0,
    workers: int = 1,
    adaptive: bool = False,
    validate: bool = False,
    solver_options=None,
) -> EstimatorResult:
    """Monte Carlo estimate of the circuit expectation value.

    ``frame`` is a FrameKind (or its string value) or a prebuilt catalog on
    the circuit register.  Per-worker RNG streams are spawned from the master
    seed and merged in worker order, so results are bit-for-bit reproducible
    for a fixed (circuit, frame manifest, seed, workers).
    """
    if isinstance(frame, FrameCatalog):
        catalog = frame
    else:
        catalog = build_catalog(
            frame, circuit.n_qubits, hyper_a=hyper_a, extra_random=extra_random, seed=frame_seed
        )
    plan = prepare_plan(circuit, catalog, picture, options=solver_options)
    n_planned = plan_samples(plan.e_bound, epsilon, delta)
    if n_planned == 0:
        return EstimatorResult(
            mean=0.0, n_samples=0, e_bound=plan.e_bound, epsilon=epsilon, delta=delta,
            empirical_std_error=0.0, seed=seed,
            frame_manifest_hash=catalog.manifest_hash(),
        )

    workers = max(1, int(workers))
    streams = [np.random.Generator(np.random.PCG64(s))
               for s in np.random.SeedSequence(seed).spawn(workers)]
    counts = [n_planned // workers] * workers
    for k in range(n_planned % workers):
        counts[k] += 1

    chunks = []
    drawn = 0
    stop = False
    batch = max(1, min(2000, n_planned)) if adaptive else None
    for rng, want in zip(streams, counts):
        got = 0
        while got < want and not stop:
            take = want - got if batch is None else min(batch, want - got)
            vals = np.empty(take, dtype=complex)
            for i in range(take):
                vals[i] = sample_path(plan, rng).estimator_value
            if validate:
                overflow = np.abs(vals) > plan.e_bound * (1 + 1e-9) + 1e-12
                if overflow.any():
                    raise AssertionError("sampled |E| exceeded its bound")
            chunks.append(vals)
            got += take
            drawn += take
            if adaptive and drawn >= 2 * batch:
                values_so_far = np.concatenate(chunks)
                err = values_so_far.real.std(ddof=1) / math.sqrt(drawn)
                if 3.0 * err <= epsilon:
                    stop = True
        if stop:
            break

    values = np.concatenate(chunks)
    n = values.size
    mean = complex(values.sum() / n)  # numpy pairwise summation
    std_err = float(values.real.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    imag_err = float(values.imag.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if abs(mean.imag) > 3.0 * max(imag_err, 1e-15):
        warnings.warn(
            f"imaginary residue {mean.imag:.3e} exceeds 3 sigma ({imag_err:.3e}); "
            "the observable decomposition may be inconsistent",
            stacklevel=2,
        )
    return EstimatorResult(
        mean=float(mean.real),
        n_samples=int(n),
        e_bound=float(plan.e_bound),
        epsilon=float(epsilon),
        delta=float(delta),
        empirical_std_error=std_err,
        seed=int(seed),
        imag_mean=float(mean.imag),
        imag_std_error=imag_err,
        max_abs_estimate=float(np.abs(values).max()),
        frame_manifest_hash=catalog.manifest_hash(),
    )
