"""Independent better-response dynamics on networked potential games.

Library layout:

- :mod:`lazydyn.graph`: graphs, generators, the layered frontier network
- :mod:`lazydyn.game`: edge-potential games, responses, instability
- :mod:`lazydyn.dynamics`: activation schedules and the simulation engine
- :mod:`lazydyn.analysis`: exact drift, hitting-time oracle, bound
  calculators, oscillation and frontier experiments
- :mod:`lazydyn.cli`: batch experiment runner (``lazydyn`` entry point)
"""

from .analysis import (
    CycleParams,
    DriftReport,
    FrontierReport,
    HittingTimeResult,
    LowerBoundResult,
    balanced_bipartite_config,
    cycle_holds,
    cycle_params,
    exact_drift,
    exact_hitting_time,
    frontier_check,
    general_drift_identity_check,
    lower_bound_experiment,
    matched_drift_bound,
    mc_drift,
    theorem_bound,
)
from .dynamics import (
    Adaptive,
    Constant,
    LocalDegree,
    MaxDegree,
    NeighborhoodMax,
    PotentialWeighted,
    RunResult,
    StepReport,
    better_response_mode,
    derive_trial_seed,
    probabilities,
    respond,
    run,
    step,
)
from .game import (
    BLACK,
    WHITE,
    EdgeGame,
    GameInstance,
    best_response,
    conflict_count,
    from_potential_tables,
    instance_from_spec,
    load_instance,
    minority,
    monochromatic,
    opinion_game,
    payoff_gain,
    random_configuration,
    response_gains,
    save_instance,
    symmetric_coordination,
    total_potential,
    unstable_set,
)
from .graph import (
    Graph,
    clique,
    complete_bipartite,
    cycle,
    erdos_renyi,
    from_edge_list,
    grid,
    path,
    standard_family,
    star,
    tightness_network,
)

__version__ = "0.1.0"
