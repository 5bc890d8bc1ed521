"""Norms, operators and certified decompositions in Lipschitz free spaces
over finite pointed metric spaces."""
from .decompose import (
    ClosePairDecomposition,
    QuotientDecomposition,
    RebalanceResult,
    close_pairs_decompose,
    far_pair_inequality,
    mass_bound_check,
    optimal_lift,
    separated_rebalance,
    separation_violations,
)
from .freespace import (
    as_moments,
    delta,
    evaluate,
    free_norm,
    free_norm_dual,
    free_norm_primal,
    plan_cost,
    plan_moments,
    support,
)
from .ideals import CarrierError, atom_cost, ideal_norm, q_map, rad, rad_table, radiinf_margin
from .instances import instance_from_json, instance_to_json, load_instance, random_instance
from .lipschitz import (
    SeparationError,
    glue_separated,
    lip_norm,
    mcshane_extend,
    sup_norm,
    tent_bump,
    truncate_between,
)
from .metric import (
    MetricError,
    PointedMetricSpace,
    ball,
    from_points,
    normalize_and_adjoin_basepoint,
)
from .operators import apply_T, apply_T_star, fixed_point_check, weight
from .solver import LinearProgram, LpSolution, SolverInstabilityError, solve
from .suite import verify

__version__ = "0.1.0"
