"""Best L0, L1 and L-infinity isotonic regressions of weighted data on partial orders."""
from .estimators import Lex0IsotonicRegression, LexInfIsotonicRegression, StrictL1IsotonicRegression
from .exceptions import BudgetExceededError, ConvergenceError, CycleError, StabilizationError
from .graph import (
    Dag,
    ErrorCurve,
    WeightedFunction,
    build_dag,
    chain,
    compare_lex_0,
    compare_lex_inf,
    domination_closure,
    error_curve,
    is_isotonic,
    level_sets,
    lp_error,
    transitive_closure,
    violating_pairs,
)
from .l0 import l0_error_linear, lex0_regression_linear, strict_down0_oracle, strict_up0_oracle
from .l1 import strict_down1_linear, strict_down1_oracle
from .linf import lex_inf_regression, minimax_bound, naive_inf_regression

__version__ = "0.1.0"
