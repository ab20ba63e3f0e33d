"""
Pydantic models for solver parameters, run configuration and run reports.
"""

from qubo_annealer.models.params import AnnealParams, InequalityConstraint, Schedule, ScheduleRequest
from qubo_annealer.models.reports import (
    SCHEMA_VERSION,
    BoundaryReport,
    GraphSummary,
    InfeasibleBlocks,
    NumberPartitionReport,
    PartitionRow,
    RunConfig,
    RunReport,
    SolverInfo,
    Timing,
)

__all__ = [
    "SCHEMA_VERSION",
    "AnnealParams",
    "BoundaryReport",
    "GraphSummary",
    "InequalityConstraint",
    "InfeasibleBlocks",
    "NumberPartitionReport",
    "PartitionRow",
    "RunConfig",
    "RunReport",
    "Schedule",
    "ScheduleRequest",
    "SolverInfo",
    "Timing",
]
