"""Resource-constrained instruction scheduling for quantum control hardware.

QSDC (difference-constraint scheduling with instrument stacking), a list
scheduler baseline, and an exact branch-and-bound oracle for small circuits.
"""

from .circuit import Circuit, CircuitError, DepGraph, Gate, build_depgraph, load_circuit, parse_circuit
from .generate import random_circuit
from .listsched import schedule_list
from .oracle import LimitExceeded, OracleLimits, OracleResult, schedule_optimal
from .platform import (PlatformConfig, PlatformError, StackingRule, default_platform, load_platform,
                       parse_platform)
from .qsdc import SchedulerOptions, schedule_asap, schedule_qsdc
from .schedule import (CompareReport, Schedule, ScheduleError, Violation, compute_metrics,
                       render_gantt, speedup, validate)
from .sdc import ConstraintSystem, DiffConstraint, InfeasibleSystem, Solution

__all__ = [
    "Circuit", "CircuitError", "DepGraph", "Gate", "build_depgraph", "load_circuit", "parse_circuit",
    "random_circuit", "schedule_list", "LimitExceeded", "OracleLimits", "OracleResult",
    "schedule_optimal", "PlatformConfig", "PlatformError", "StackingRule", "default_platform",
    "load_platform", "parse_platform", "SchedulerOptions", "schedule_asap", "schedule_qsdc",
    "CompareReport", "Schedule", "ScheduleError", "Violation", "compute_metrics", "render_gantt",
    "speedup", "validate", "ConstraintSystem", "DiffConstraint", "InfeasibleSystem", "Solution",
]
