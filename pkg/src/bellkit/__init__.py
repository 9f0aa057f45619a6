"""bellkit — CHSH statistics, entanglement structure, and model fitting
for two-part coincidence experiments on a 4-dimensional complex state space."""

__version__ = "0.1.0"

from .bellstats import (
    EXPERIMENT_KEYS,
    TSIRELSON_BOUND,
    ChshReport,
    CoincidenceTable,
    ExperimentDataset,
    SinglesTable,
    TTestResult,
    chsh,
    counts_to_probabilities,
    expectation,
    marginal_deviations,
    student_t_tail,
    t_test_vs_threshold,
)
from .entanglement import (
    Evolution,
    Isomorphism,
    OperatorSchmidt,
    SchmidtDecomposition,
    apply_iso,
    canonical_iso,
    canonical_iso_of,
    check_factorization,
    evolution_between,
    is_product_evolution,
    measurement_entanglement_degree,
    operator_schmidt,
    random_isomorphism,
    refute_common_product_iso,
    reshuffle,
    schmidt_state,
    states_equal_up_to_phase,
)
from .hilbert import CMat, ConvergenceError, CVec, gram, inner, orthonormalize, svd, tensor, tensor_op
from .io import ParseError, parse_dataset_file, write_dataset_file
from .modelfit import (
    FitConfig,
    FitResult,
    ObservableModel,
    StateFitResult,
    StateVector,
    expectation_from_model,
    fit_basis,
    fit_state,
    load_model,
    load_state,
    probabilities_from_model,
    reference_fixture,
    reference_published_operators,
    synthesize,
)
from .verify import CheckRow, run_verification

__all__ = [
    "__version__",
    "EXPERIMENT_KEYS",
    "TSIRELSON_BOUND",
    "ChshReport",
    "CoincidenceTable",
    "ExperimentDataset",
    "SinglesTable",
    "TTestResult",
    "chsh",
    "counts_to_probabilities",
    "expectation",
    "marginal_deviations",
    "student_t_tail",
    "t_test_vs_threshold",
    "Evolution",
    "Isomorphism",
    "OperatorSchmidt",
    "SchmidtDecomposition",
    "apply_iso",
    "canonical_iso",
    "canonical_iso_of",
    "check_factorization",
    "evolution_between",
    "is_product_evolution",
    "measurement_entanglement_degree",
    "operator_schmidt",
    "random_isomorphism",
    "refute_common_product_iso",
    "reshuffle",
    "schmidt_state",
    "states_equal_up_to_phase",
    "CMat",
    "ConvergenceError",
    "CVec",
    "gram",
    "inner",
    "orthonormalize",
    "svd",
    "tensor",
    "tensor_op",
    "ParseError",
    "parse_dataset_file",
    "write_dataset_file",
    "FitConfig",
    "FitResult",
    "ObservableModel",
    "StateFitResult",
    "StateVector",
    "expectation_from_model",
    "fit_basis",
    "fit_state",
    "load_model",
    "load_state",
    "probabilities_from_model",
    "reference_fixture",
    "reference_published_operators",
    "synthesize",
    "CheckRow",
    "run_verification",
]
