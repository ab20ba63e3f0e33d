"""
Models for annealer parameters.

These models validate the knobs of a solve: the temperature schedule, the run
parameters (restarts, seed, escape offset, one-hot handling, time limit) and
the inequality constraints evaluated alongside the QUBO matrix.
"""

# Standard library imports
from typing import List, Literal, Optional, Tuple

# Third-party imports
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Schedule(BaseModel):
    """
    Temperature schedule of a single annealing run.

    Attributes:
        kind: Interpolation between ``t_start`` and ``t_end`` (geometric or linear)
        t_start: Temperature of the first Monte Carlo step
        t_end: Temperature of the last Monte Carlo step
        steps: Number of Monte Carlo steps per run

    Example:
        ```json
        {"kind": "geometric", "t_start": 10.0, "t_end": 0.01, "steps": 5000}
        ```
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["geometric", "linear"] = Field(default="geometric", description="Schedule shape")
    t_start: float = Field(description="Initial temperature", gt=0, examples=[10.0])
    t_end: float = Field(description="Final temperature", gt=0, examples=[0.01])
    steps: int = Field(description="Monte Carlo steps per run", ge=1, examples=[5000])

    @model_validator(mode="after")
    def _check_order(self) -> "Schedule":
        if self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must be >= t_end ({self.t_end})")
        return self


class AnnealParams(BaseModel):
    """
    Run parameters of the annealer.

    Attributes:
        restarts: Number of independent runs
        seed: Root seed; restart streams are spawned from it by index
        initial_state_mode: ``shared`` starts every restart from one state, ``random`` draws one per restart
        offset_increment: Escape offset added after every all-rejected step (``None`` = scale-derived default)
        one_hot_mode: ``moves`` keeps one-hot blocks feasible with pair moves, ``penalty`` relies on a QUBO penalty
        engine: ``parallel-trial`` (all flips tried each step) or ``sequential-sa`` (one random flip per step)
        time_limit_sec: Optional wall-clock cap over the whole solve
        trace_every: Record a trace sample every this many steps (``None`` disables tracing)
        workers: Number of worker processes for restarts (1 runs them in-process)
    """

    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default=1, ge=1, description="Independent run count")
    seed: int = Field(default=0, ge=0, description="Root RNG seed")
    initial_state_mode: Literal["shared", "random"] = Field(
        default="shared", description="Shared initial state for all restarts, or one random state per restart"
    )
    offset_increment: Optional[float] = Field(default=None, ge=0, description="Escape offset increment")
    one_hot_mode: Literal["moves", "penalty"] = Field(default="moves", description="One-hot constraint handling")
    engine: Literal["parallel-trial", "sequential-sa"] = Field(default="parallel-trial", description="Step engine")
    time_limit_sec: Optional[float] = Field(default=None, gt=0, description="Wall-clock cap in seconds")
    trace_every: Optional[int] = Field(default=None, ge=1, description="Trace sampling interval in steps")
    workers: int = Field(default=1, ge=1, description="Worker processes for restarts")


class InequalityConstraint(BaseModel):
    """
    Linear inequality ``sum(coeff * x) >= bound`` evaluated outside the QUBO matrix.

    A violated constraint costs ``lam * max(0, bound - sum(coeff * x))``.

    Example:
        ```json
        {"terms": [[0, 1], [3, 1]], "bound": 1, "lambda": 1.0}
        ```
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    terms: List[Tuple[int, int]] = Field(description="(variable index, integer coefficient) pairs")
    bound: int = Field(description="Right-hand side of the >= inequality")
    lam: float = Field(default=1.0, ge=0, alias="lambda", description="Penalty weight per unit of violation")

    @model_validator(mode="after")
    def _check_terms(self) -> "InequalityConstraint":
        if any(index < 0 for index, _ in self.terms):
            raise ValueError("constraint variable indices must be non-negative")
        return self


class ScheduleRequest(BaseModel):
    """
    A schedule to be resolved against the model at solve time.

    Temperatures left unset are derived from the problem scale: ``t_start`` is
    the largest ``|delta|`` over ``delta_samples`` random candidate moves on the
    initial state and ``t_end = t_end_ratio * t_start`` (capped at 1.0 for
    integer-valued models).

    Example:
        ```json
        {"steps": 20000, "kind": "geometric", "t_end_ratio": 0.001, "delta_samples": 100}
        ```
    """

    model_config = ConfigDict(frozen=True)

    steps: int = Field(description="Monte Carlo steps per run", ge=1)
    kind: Literal["geometric", "linear"] = Field(default="geometric", description="Schedule shape")
    t_start: Optional[float] = Field(default=None, gt=0, description="Fixed initial temperature")
    t_end: Optional[float] = Field(default=None, gt=0, description="Fixed final temperature")
    t_end_ratio: float = Field(default=1e-3, gt=0, le=1, description="t_end / t_start when t_end is derived")
    delta_samples: int = Field(default=100, ge=1, description="Random moves sampled to estimate t_start")
