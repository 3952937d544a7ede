"""Lower bounds, exact solutions and optimality certificates for
minimum-error discrimination of quantum states."""

from .bounds import BOUND_NAMES, BoundReport, all_bounds, bound_l0, bound_l1, bound_l2, bound_l3, bound_l4, bound_l5, bound_l6, helstrom
from .compare import SweepConfig, SweepSummary, format_ranking, rank_bounds, run_sweep
from .ensemble import Ensemble, Povm, StructuredEnsemble, effective_dimension, structured_to_ensemble, validate_ensemble
from .exact import (
    check_l4_attainability,
    certify_optimal,
    solve_commuting,
    solve_structured,
    solve_two_state,
    unambiguous_feasibility,
)
from .io import load_ensemble, load_povm, save_ensemble, save_povm
from .linalg import DEFAULT_TOL, Tolerances, hermitian_eig
from .sampling import random_commuting_ensemble, random_ensemble, random_structured

__version__ = "0.1.0"
