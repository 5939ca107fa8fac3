"""Pareto set identification in multi-output linear bandits."""

from ._linpsi import (
    BudgetTooSmall,
    DataError,
    DegenerateInstance,
    Error,
    Instance,
    InternalError,
    InvalidArgument,
    SingularMatrix,
    apportion,
    complexities,
    g_optimal_design,
    gege_fixed_budget,
    gege_fixed_confidence,
    load_instance,
    make_synthetic_family,
    min_fixed_budget,
    min_rounding_budget,
    pareto_set,
    round_design,
    true_gaps,
    uniform_fixed_budget,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
