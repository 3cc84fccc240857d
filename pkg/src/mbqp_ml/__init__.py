"""ML-guided primal heuristics for mixed binary quadratic programs."""

from .instance import (
    FEAS_TOL,
    MbqpInstance,
    Solution,
    check_feasibility,
    energy_weights,
    evaluate_objective,
    fix_variables,
    make_solution,
)

__version__ = "0.1.0"

from loguru import logger as _logger

_logger.disable("mbqp_ml")
