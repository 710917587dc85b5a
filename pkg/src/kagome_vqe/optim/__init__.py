"""Classical optimizers for the variational energy."""

from .bfgs import LineSearchError, bfgs_minimize, wolfe_line_search
from .cobyla import cobyla_minimize
from .objective import BudgetExhausted, Objective, finite_difference_gradient
from .spsa import SpsaSchedule, calibrate_spsa, rademacher, spsa_gradient, spsa_minimize
from .trace import CSV_HEADER, OptimizerTrace, TraceRecord

__all__ = [
    "Objective",
    "BudgetExhausted",
    "finite_difference_gradient",
    "OptimizerTrace",
    "TraceRecord",
    "CSV_HEADER",
    "SpsaSchedule",
    "calibrate_spsa",
    "rademacher",
    "spsa_gradient",
    "spsa_minimize",
    "bfgs_minimize",
    "wolfe_line_search",
    "LineSearchError",
    "cobyla_minimize",
]
