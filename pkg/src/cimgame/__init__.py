"""Competitive influence-maximization budget games.

Pipeline: identify influential nodes by reverse-reachability sampling,
estimate their overlap-aware values, solve the discrete budget-allocation
game between two competitors with an expanding restricted-game loop backed
by an exact best-response oracle, and validate strategies in repeated
two-party cascade tournaments.
"""

__version__ = "0.1.0"

from .best_response import StepProfile, best_response, build_step_profiles
from .diffusion import (
    CompetitionStats,
    assign_seeds,
    diffuse,
    payoff_error_experiment,
    run_competition,
)
from .game import (
    Allocation,
    GameError,
    GameSpec,
    MixedStrategy,
    action_space_size,
    enumerate_allocations,
    node_gain,
    payoff_mixed,
    payoff_pure,
)
from .graph import Graph, GraphError, assign_probabilities, from_edge_array, load_edge_list
from .nash import (
    EquilibriumResult,
    RestrictedGame,
    SolverError,
    double_oracle,
    solve_matrix_game,
    solve_zero_sum,
)
from .rng import substream
from .rrsets import (
    InfluenceValues,
    RRIndex,
    build_index,
    estimate_spread,
    estimate_values,
    estimate_values_simple,
    load_cache,
    sample_competitive_rr_set,
    sample_rr_set,
    save_cache,
    select_seeds,
)
from .strategies import (
    FixedStrategy,
    NashStrategy,
    RandomStrategy,
    gen_best_response_to,
    gen_oneeach,
    gen_random,
    gen_twoeach,
    parse_strategy,
)
