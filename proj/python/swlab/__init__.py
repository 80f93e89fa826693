"""Greedy routing on augmented lattices and the budget game lower bound."""

from ._core import (
    CountOverflowError,
    InvalidBetError,
    LrcDistribution,
    MetricSpace,
    StrategyGapError,
    __version__,
    audit_b2,
    canonical_points,
    count_sphere_ball,
    count_sphere_sphere,
    estimate_game_rounds,
    estimate_routing_time,
    expected_rounds_exact,
    greedy_route,
    induced_bet,
    induced_bet_mc,
    log_square_shrink_gap,
    lower_bound_reference,
    optimal_g_strategy,
    run_experiment,
    sample_sphere_uniform,
    sphere_size,
    validate_bet,
)

__all__ = [
    "CountOverflowError",
    "InvalidBetError",
    "LrcDistribution",
    "MetricSpace",
    "StrategyGapError",
    "__version__",
    "audit_b2",
    "canonical_points",
    "count_sphere_ball",
    "count_sphere_sphere",
    "estimate_game_rounds",
    "estimate_routing_time",
    "expected_rounds_exact",
    "greedy_route",
    "induced_bet",
    "induced_bet_mc",
    "log_square_shrink_gap",
    "lower_bound_reference",
    "optimal_g_strategy",
    "run_experiment",
    "sample_sphere_uniform",
    "sphere_size",
    "validate_bet",
]
