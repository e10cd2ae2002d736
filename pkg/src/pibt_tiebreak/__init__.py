"""PIBT with hindrance and regret tiebreaking, vanilla LaCAM and a lifelong simulator."""

from .grid_graph import (
    UNREACHABLE,
    DistanceCache,
    DistanceTable,
    GridMap,
    MapParseError,
    distance_table,
    generate_sortation_map,
    load_map,
    neighbors,
    parse_map,
    serialize_map,
)
from .instance import Instance, ScenarioError, parse_scen, random_instance, soc_lower_bound
from .lacam import SolveResult, solve_oneshot
from .lifelong import SimResult, assign_goal, run_lifelong
from .maps import resolve_map
from .metrics import normalized_soc, sum_of_costs, throughput, validate_solution
from .monte_carlo import heuristic_h, mc_step, transition_cost_g
from .pibt import (
    PriorityState,
    Strategy,
    StrategyConfig,
    collision_ok,
    compute_preference,
    hindrance_of,
    pibt_step,
    update_priorities,
)
from .regret import RegretTable, agent_regret, regret_step
from .rng import Rng

__version__ = "0.1.0"
