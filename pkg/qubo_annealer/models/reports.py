"""
Models for run configuration and run reports.

A ``RunConfig`` is the fully resolved configuration of one CLI command (flags
over presets over solver defaults). A ``RunReport`` echoes it together with
the solver settings actually used and the decoded results. Wall-clock values
live in the separate ``timing`` block so that everything else is reproducible
byte for byte from the same command line and seed.
"""

# Standard library imports
from typing import Dict, List, Literal, Optional

# Third-party imports
from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = "1.0"


class RunConfig(BaseModel):
    """
    Resolved configuration of a ``numpart``, ``graphpart`` or ``sweepk`` run.

    Example:
        ```json
        {
          "command": "graphpart",
          "source": "builtin:karate",
          "k": 4,
          "gamma": 1.0,
          "restarts": 20,
          "steps": 34000,
          "seed": 0,
          "engine": "parallel-trial",
          "onehot": "moves",
          "lambda": 1.0,
          "preset": "paper"
        }
        ```
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    command: Literal["numpart", "graphpart", "sweepk"] = Field(description="CLI command")
    source: Optional[str] = Field(
        default=None, description="Input: a file path, 'builtin:<name>' or 'generated'", examples=["builtin:karate"]
    )
    generate: Optional[int] = Field(default=None, ge=1, description="numpart: size of a generated instance")
    max_value: int = Field(default=10000, ge=1, description="numpart: largest generated value")
    expect_optimal: bool = Field(default=False, description="numpart: exit 2 unless D <= 1")
    k: Optional[int] = Field(default=None, ge=1, description="graphpart: group count")
    k_min: Optional[int] = Field(default=None, ge=1, description="sweepk: smallest group count")
    k_max: Optional[int] = Field(default=None, ge=1, description="sweepk: largest group count")
    gamma: float = Field(default=1.0, gt=0, description="Modularity resolution parameter")
    restarts: int = Field(ge=1, description="Independent annealing runs")
    steps: int = Field(ge=1, description="Monte Carlo steps per run")
    t_start: Optional[float] = Field(default=None, gt=0, description="Initial temperature (derived when unset)")
    t_end: Optional[float] = Field(default=None, gt=0, description="Final temperature (derived when unset)")
    schedule_kind: Literal["geometric", "linear"] = Field(default="geometric", description="Schedule shape")
    seed: int = Field(default=0, ge=0, description="Root RNG seed")
    engine: Literal["parallel-trial", "sequential-sa"] = Field(default="parallel-trial", description="Step engine")
    initial_state_mode: Literal["shared", "random"] = Field(default="shared", description="Initial state policy")
    onehot: Literal["moves", "penalty"] = Field(default="moves", description="One-hot constraint handling")
    lam: float = Field(default=1.0, ge=0, alias="lambda", description="Weight of each non-empty-group constraint")
    one_hot_penalty: Optional[float] = Field(default=None, ge=0, description="Penalty-mode weight A")
    offset_increment: Optional[float] = Field(default=None, ge=0, description="Escape offset increment")
    time_limit_sec: Optional[float] = Field(default=None, gt=0, description="Wall-clock cap per solve")
    workers: int = Field(default=1, ge=1, description="Worker processes for restarts")
    trace_every: Optional[int] = Field(default=None, ge=1, description="Trace sampling interval")
    preset: Optional[str] = Field(default=None, description="Budget preset the run started from")
    format: Literal["json", "csv"] = Field(default="json", description="Report format")
    out: Optional[str] = Field(default=None, description="Report destination (stdout when unset)")

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if self.command == "numpart" and self.source is None and self.generate is None:
            raise ValueError("numpart needs an input file or --generate")
        if self.command == "graphpart" and self.k is None:
            raise ValueError("graphpart needs --k")
        if self.command == "sweepk":
            if self.k_min is None or self.k_max is None:
                raise ValueError("sweepk needs --k-min and --k-max")
            if self.k_min > self.k_max:
                raise ValueError(f"--k-min ({self.k_min}) must not exceed --k-max ({self.k_max})")
        if self.command != "numpart" and self.engine == "sequential-sa" and self.onehot == "moves":
            raise ValueError("the sequential SA baseline needs --onehot penalty")
        if self.t_start is not None and self.t_end is not None and self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must be >= t_end ({self.t_end})")
        return self


class SolverInfo(BaseModel):
    """
    Solver settings as resolved for the run.

    For sweeps the temperatures are those of the last K; each row carries its own.
    """

    engine: str = Field(description="Step engine")
    seed: int = Field(description="Root RNG seed")
    restarts: int = Field(description="Independent runs")
    steps: int = Field(description="Monte Carlo steps per run")
    schedule_kind: str = Field(description="Schedule shape")
    onehot: str = Field(description="One-hot handling")
    initial_state_mode: str = Field(description="Initial state policy")


class NumberPartitionReport(BaseModel):
    """
    Decoded number partition.

    ``bits[j] == 1`` puts value ``j`` on side A, so ``sum_a``, ``d`` and
    ``energy`` can be recomputed from ``bits`` and the input values.
    """

    n: int = Field(description="Number of values", examples=[500])
    total: int = Field(description="Sum of all values c")
    sum_a: int = Field(description="Sum of side A")
    sum_b: int = Field(description="Sum of side B")
    d: int = Field(description="|sum_b - sum_a|", ge=0)
    energy: float = Field(description="Best model energy, equal to d**2")
    karmarkar_karp_d: int = Field(description="Difference reached by the largest differencing method", ge=0)
    t_start: float = Field(description="Initial temperature")
    t_end: float = Field(description="Final temperature")
    offset_increment: float = Field(description="Escape offset increment")
    time_limit_reached: bool = Field(default=False, description="The wall-clock cap cut the run short")
    bits: List[int] = Field(description="Side of every value (1 = A)")
    trace: Optional[List[List[float]]] = Field(
        default=None, description="Best restart samples: step, temperature, offset, current, best"
    )


class BoundaryReport(BaseModel):
    boundary_mean: Optional[float] = Field(default=None, description="Mean weight of edges crossing groups")
    interior_mean: Optional[float] = Field(default=None, description="Mean weight of edges inside a group")
    boundary_count: int = Field(description="Edges crossing groups")
    interior_count: int = Field(description="Edges inside a group")


class InfeasibleBlocks(BaseModel):
    zero_hot: List[str] = Field(description="Labels of nodes with no group bit set")
    multi_hot: List[str] = Field(description="Labels of nodes with several group bits set")


class PartitionRow(BaseModel):
    """
    Result of one graph partitioning solve.

    Example:
        ```json
        {
          "k": 4,
          "feasible": true,
          "modularity": 0.4449,
          "best_energy": -0.4449,
          "assignment": {"0": 0, "1": 0, "2": 1},
          "group_sizes": [12, 10, 6, 6],
          "empty_groups": []
        }
        ```
    """

    k: int = Field(description="Group count", ge=1)
    feasible: bool = Field(description="Every node has exactly one group")
    modularity: Optional[float] = Field(default=None, description="Weighted modularity of the assignment")
    best_energy: float = Field(description="Best total energy (model plus constraint penalties)")
    t_start: float = Field(description="Initial temperature")
    t_end: float = Field(description="Final temperature")
    offset_increment: float = Field(description="Escape offset increment")
    time_limit_reached: bool = Field(default=False, description="The wall-clock cap cut the run short")
    assignment: Optional[Dict[str, int]] = Field(default=None, description="Node label -> group index")
    group_sizes: Optional[List[int]] = Field(default=None, description="Nodes per group")
    empty_groups: Optional[List[int]] = Field(default=None, description="Groups without nodes")
    boundary: Optional[BoundaryReport] = Field(default=None, description="Boundary/interior edge weight summary")
    infeasible: Optional[InfeasibleBlocks] = Field(default=None, description="Offending blocks of an infeasible state")
    trace: Optional[List[List[float]]] = Field(
        default=None, description="Best restart samples: step, temperature, offset, current, best"
    )


class GraphSummary(BaseModel):
    n: int = Field(description="Node count")
    edge_count: int = Field(description="Edge count")
    total_weight_2m: float = Field(description="Twice the summed edge weight")
    min_weight: Optional[float] = Field(default=None, description="Smallest edge weight")
    max_weight: Optional[float] = Field(default=None, description="Largest edge weight")
    mean_weight: Optional[float] = Field(default=None, description="Mean edge weight")
    components: int = Field(description="Connected components")


class Timing(BaseModel):
    """Wall-clock measurements; excluded from reproducibility comparisons."""

    total_seconds: float = Field(description="Whole command", ge=0)
    solve_seconds: Dict[str, float] = Field(
        default_factory=dict, description="Per solve: 'numpart' or the group count K"
    )


class RunReport(BaseModel):
    """
    Report of one CLI command.

    Field order is fixed, so the JSON emission is deterministic; everything
    except ``timing`` is reproducible from the same command line and seed.
    """

    schema_version: str = Field(default=SCHEMA_VERSION, description="Report schema version")
    command: str = Field(description="CLI command")
    config: RunConfig = Field(description="Resolved run configuration")
    solver: SolverInfo = Field(description="Solver settings")
    graph: Optional[GraphSummary] = Field(default=None, description="Input graph summary (graph commands)")
    number_partition: Optional[NumberPartitionReport] = Field(default=None, description="numpart result")
    partitions: List[PartitionRow] = Field(default_factory=list, description="One row per solved K, K ascending")
    best_k: Optional[int] = Field(default=None, description="K with the highest modularity among feasible rows")
    timing: Timing = Field(description="Wall-clock block")

    def deterministic_dump(self) -> dict:
        """The report without its timing block."""
        return self.model_dump(mode="json", by_alias=True, exclude={"timing"})
