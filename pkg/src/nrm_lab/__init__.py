"""Network revenue management: DLP benchmarks, re-solving admission policies
and a paired Monte Carlo regret harness."""
from ._backend import BACKEND
from .arrivals import ArrivalPath, merge_events, sample_path
from .errors import NrmError
from .lp import LpProblem, LpSolution, dlp_value, solve_bounded_lp, solve_dlp
from .model import Instance, capacity_rate, is_nondegenerate, load_instance, validate_instance
from .oracle import estimate_v_ho, hindsight_optimum, single_class_exact_optimum
from .policies import PolicyKind, PolicySpec, compute_schedule, run_policy

__all__ = [
    "BACKEND",
    "ArrivalPath",
    "Instance",
    "LpProblem",
    "LpSolution",
    "NrmError",
    "PolicyKind",
    "PolicySpec",
    "capacity_rate",
    "compute_schedule",
    "dlp_value",
    "estimate_v_ho",
    "hindsight_optimum",
    "is_nondegenerate",
    "load_instance",
    "merge_events",
    "run_policy",
    "sample_path",
    "single_class_exact_optimum",
    "solve_bounded_lp",
    "solve_dlp",
    "validate_instance",
]

__version__ = "0.1.0"
