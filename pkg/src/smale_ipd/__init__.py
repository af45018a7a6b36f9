"""Time-average (Smale) strategies for the symmetric n-player Iterated Prisoner's Dilemma."""

from smale_ipd.game import (
    C,
    D,
    GameSpec,
    MalformedGameError,
    Move,
    ValidationReport,
    Violation,
    mean_payoff,
    payoff_vector,
    staircase_game,
    validate_game,
)
from smale_ipd.geometry import (
    DIAGONAL,
    InfeasibleLineError,
    Line,
    StrategySet,
    affine_eval,
    feasible_slope_bounds,
    good_line,
    is_separation_line,
    project,
    strategy_vertices,
)
from smale_ipd.plans import AllC, AllD, Eventual, Scripted, SimpleSmale, choose_initial, decide
from smale_ipd.engine import SimState, Trajectory, BoundCheck, check_smale_bound, run, step
from smale_ipd.analysis import (
    DegenerateLinesError,
    DissenterReport,
    LimitPrediction,
    SegmentLimit,
    dissenter_statistics,
    harmonic_slope,
    predict_limit,
    segment_limit,
)

__version__ = "0.1.0"
