"""bellforge: numerical toolkit for Bell inequality violations.

Explicit random-sign constructions of Bell functionals, POVMs and states,
exact and heuristic classical solvers, see-saw quantum lower bounds, a
Gram-matrix SDP relaxation with certificates, and entanglement measures.
"""

__version__ = "0.1.0"

from .classical import (
    ClassicalResult,
    classical_value_exact,
    classical_value_local,
    epsilon_norm_exact,
)
from .construction import (
    ConstructionReport,
    ConstructionTag,
    QuantumTerms,
    SignTensor,
    build_bell,
    build_povms,
    construct_report,
    explicit_quantum_value,
    gen_signs,
    guaranteed_cross_bound,
    rebuild_from_report,
    row_spectral_bound,
    scale_constant,
    signs_from_json,
    signs_to_json,
)
from .entanglement import (
    DeltaClassification,
    DyadicDecomposition,
    ExtractionResult,
    PolarizationResult,
    delta_classify,
    dyadic_decompose,
    entropy_of_entanglement,
    extract_max_entangled,
    f_alpha,
    iviol,
    polarization_select,
)
from .errors import (
    BellforgeError,
    BudgetExceededError,
    DimensionCapError,
    EigenConvergenceError,
    PositivityError,
    PovmValidationError,
    ProvenanceError,
    ScenarioMismatchError,
    UndefinedRatioError,
)
from .linalg import (
    EigDecomposition,
    herm_eig,
    kron,
    min_eigenvalue,
    psd_project,
    spectral_norm,
    sym,
)
from .model import (
    BellFunctional,
    DeterministicStrategy,
    ProbabilityTable,
    Scenario,
    check_nonsignalling,
    chsh_game,
    deterministic_prob,
    functional_from_json,
    functional_to_json,
    pair,
    quantum_prob_pure,
    table_from_json,
    table_to_json,
    zeta1,
)
from .povm import (
    PovmFamily,
    PovmReport,
    identity_povm,
    random_povm,
    require_valid_povm,
    validate_povm,
)
from .sdp import (
    GramProblem,
    SdpSolution,
    VectorStrategy,
    build_op_gram,
    gram_from_json,
    gram_to_json,
    map_norm,
    omega_op,
    sign_vector_strategy,
    solve_sdp,
    vector_certificate_value,
)
from .seesaw import (
    SeesawConfig,
    SeesawResult,
    bell_operator,
    max_entangled_value,
    optimal_povm,
    povm_best_response,
    povm_subproblem_gram,
    project_to_povm_set,
    seesaw,
    seesaw_magnitude,
)
from .states import SchmidtState, build_state
