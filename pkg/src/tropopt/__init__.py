"""Tropical (max-plus) two-sided optimization via mean-payoff games.

Exact minimization of distance-style and coupling objectives under
two-sided max-plus affine constraints, with bisection and Newton-style
strategy iteration on parametric games, certificates, and a batch
experiment harness.
"""

from .semiring import (
    ExtScalar,
    NEG_INF,
    POS_INF,
    Rational,
    UndefinedSum,
    ZERO,
    fin,
    scal,
    tmax,
    tmin,
)
from .matrix import (
    DivergentStar,
    TropMatrix,
    TypingError,
    conjugate,
    const_matrix,
    dual_mat_mul,
    dual_mat_vec_mul,
    identity,
    kleene_star,
    mat_add,
    mat_mul,
    mat_vec_mul,
    max_cycle_mean,
    min_mean_cycle,
)
from .games import (
    EngineError,
    GameGraph,
    GameValues,
    InvalidStrategy,
    IsolatedNode,
    StrategyPair,
    TwoSidedSystem,
    build_game,
    feasible_finite,
    play_value,
    restrict_strategies,
    solve_values,
)
from .pseudolinear import (
    AlcovedProblem,
    InfeasibleReduction,
    PseudolinearProblem,
    SolveOutcome,
    bisection_solve,
    certify_optimal,
    certify_unbounded,
    initial_bounds,
    newton_solve,
    objective,
    optimality_certificate,
    parametric_game,
    reduce_by_strategy,
    solve_alcoved,
    spectral_value,
    unboundedness_certificate,
)
from .pseudoquadratic import (
    PseudoquadraticProblem,
    bisection_solve_quad,
    bounds_quad,
    newton_solve_quad,
    objective_quad,
    parametric_game_quad,
    round_bounded,
)
from .io import (
    BadRational,
    DimensionMismatch,
    IllegalInfinity,
    MalformedJson,
    dump_problem,
    format_outcome,
    parse_level,
    parse_problem,
    scalar_from_json,
    scalar_to_json,
)
from .random_instances import gen_random
from .experiments import CSV_FIELDS, parse_dims, run_experiments, write_csv

__version__ = "0.1.0"

__all__ = [
    "AlcovedProblem",
    "BadRational",
    "CSV_FIELDS",
    "DimensionMismatch",
    "DivergentStar",
    "EngineError",
    "ExtScalar",
    "GameGraph",
    "GameValues",
    "IllegalInfinity",
    "InfeasibleReduction",
    "InvalidStrategy",
    "IsolatedNode",
    "MalformedJson",
    "NEG_INF",
    "POS_INF",
    "PseudolinearProblem",
    "PseudoquadraticProblem",
    "Rational",
    "SolveOutcome",
    "StrategyPair",
    "TropMatrix",
    "TwoSidedSystem",
    "TypingError",
    "UndefinedSum",
    "ZERO",
    "bisection_solve",
    "bisection_solve_quad",
    "bounds_quad",
    "build_game",
    "certify_optimal",
    "certify_unbounded",
    "conjugate",
    "const_matrix",
    "dual_mat_mul",
    "dual_mat_vec_mul",
    "dump_problem",
    "feasible_finite",
    "fin",
    "format_outcome",
    "gen_random",
    "identity",
    "initial_bounds",
    "kleene_star",
    "mat_add",
    "mat_mul",
    "mat_vec_mul",
    "max_cycle_mean",
    "min_mean_cycle",
    "newton_solve",
    "newton_solve_quad",
    "objective",
    "objective_quad",
    "optimality_certificate",
    "parametric_game",
    "parametric_game_quad",
    "parse_dims",
    "parse_level",
    "parse_problem",
    "play_value",
    "reduce_by_strategy",
    "restrict_strategies",
    "round_bounded",
    "run_experiments",
    "scal",
    "scalar_from_json",
    "scalar_to_json",
    "solve_alcoved",
    "solve_values",
    "spectral_value",
    "tmax",
    "tmin",
    "unboundedness_certificate",
    "write_csv",
]
