"""Frame-based quasi-probability simulation of noisy quantum circuits."""

from .operators import (
    DenseOperator,
    NoisyChannel,
    PauliString,
    ProductState,
    adjoint,
    apply_channel,
    compose_noisy_gate,
    make_gate,
    make_noise,
    pauli_vectorize,
    pauli_reconstruct,
)
from .frames import (
    FrameCatalog,
    FrameElementLabel,
    FrameKind,
    build_catalog,
    build_diag_stab_catalog,
    build_dyad_stab_catalog,
    build_dyadic_catalog,
    build_ext_pauli_catalog,
    build_ext_pauli_local_set,
    build_pauli_catalog,
    build_product_catalog,
    catalog_from_manifest,
    enumerate_stabilizer_states,
    eval_observable_overlap,
    eval_state_overlap,
    stabilizer_state_vectors,
)
from .solver import BasisPursuitSolver, SolverFailure, SolverOptions
from .decompose import (
    HEISENBERG,
    SCHRODINGER,
    Decomposition,
    Dictionary,
    DualCertificate,
    QuasiProbTable,
    build_dictionary,
    build_quasiprob_table,
    decompose_gate_action,
    restricted_catalog_for_gate,
    solve_min_one_norm,
    verify_decomposition,
)
from .simulate import (
    Circuit,
    EstimatorResult,
    GateApplication,
    PathSample,
    SamplingPlan,
    bound_E,
    circuit_from_json,
    circuit_to_json,
    enumerate_all_paths,
    estimate,
    exact_expectation,
    plan_samples,
    prepare_plan,
    sample_path,
)

__version__ = "0.1.0"
