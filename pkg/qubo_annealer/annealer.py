"""
Parallel-trial simulated annealing with a dynamic escape offset.

Each Monte Carlo step of the parallel-trial engine evaluates the flip of every
variable against the same state, lets every candidate draw its own Metropolis
acceptance, applies one accepted candidate chosen uniformly at random, and
otherwise raises an additive offset that is subtracted from all deltas on the
next step. The offset returns to zero on the first accepted move.

Linear inequality constraints ``sum(coeff * x) >= bound`` are kept out of the
QUBO matrix and charged as hinge penalties ``lam * max(0, bound - lhs)``; their
per-flip deltas are computed alongside the QUBO deltas.

Two further step engines share the acceptance rule:

* ``structured_onehot_step`` moves inside one-hot blocks (clear the set bit of
  a block, set another bit of the same block), so every visited state keeps
  exactly one bit per block.
* ``sequential_sa_step`` is the classic baseline: one random flip per step, no
  offset.

Restarts draw their random streams from ``SeedSequence(seed).spawn(...)`` by
index, so their results do not depend on execution order or on the number of
worker processes.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from qubo_annealer.errors import InfeasibleStateError, ModelError
from qubo_annealer.models.params import AnnealParams, InequalityConstraint, Schedule, ScheduleRequest
from qubo_annealer.qubo_core import (
    TRACKING_RTOL,
    BitState,
    QuboModel,
    apply_flip,
    energy,
    flip_delta,
    flip_deltas,
    init_state,
)

LOGGER = logging.getLogger(__name__)

# wall-clock is polled once per this many steps
TIME_CHECK_INTERVAL = 64

# spawned streams ahead of the restart streams: shared initial state, schedule sampling
_RESERVED_STREAMS = 2

# constraint matrices up to this many entries are also kept dense for pair moves
DENSE_CONSTRAINT_LIMIT = 4_000_000


# ─────────────────────────── constraint handling ───────────────────────────


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """
    Compiled inequality constraints ``C x >= bounds`` with weights ``lams``.

    ``matrix`` has one row per constraint and one column per model variable;
    duplicate ``(constraint, variable)`` terms are summed.
    """

    n: int
    matrix: sp.csr_matrix
    columns: sp.csc_matrix
    bounds: NDArray[np.float64]
    lams: NDArray[np.float64]
    term_rows: NDArray[np.int32]
    term_cols: NDArray[np.int32]
    term_coeffs: NDArray[np.float64]
    dense: Optional[NDArray[np.float64]] = None

    @classmethod
    def compile(cls, constraints: Iterable[InequalityConstraint], n: int) -> "ConstraintSet":
        """
        Build the sparse form of ``constraints`` over ``n`` variables.

        Raises:
            ModelError: a constraint references a variable outside ``[0, n)``.
        """
        rows: list[int] = []
        cols: list[int] = []
        coeffs: list[float] = []
        bounds: list[float] = []
        lams: list[float] = []
        for r, constraint in enumerate(constraints):
            for index, coeff in constraint.terms:
                if index >= n:
                    raise ModelError(f"constraint {r} references variable {index}, model has n={n}")
                rows.append(r)
                cols.append(index)
                coeffs.append(float(coeff))
            bounds.append(float(constraint.bound))
            lams.append(float(constraint.lam))
        m = len(bounds)
        matrix = sp.coo_matrix((coeffs, (rows, cols)), shape=(m, n), dtype=np.float64).tocsr()
        matrix.sum_duplicates()
        terms = matrix.tocoo()
        return cls(
            n=n,
            matrix=matrix,
            columns=matrix.tocsc(),
            bounds=np.asarray(bounds, dtype=np.float64),
            lams=np.asarray(lams, dtype=np.float64),
            term_rows=terms.row,
            term_cols=terms.col,
            term_coeffs=terms.data,
            dense=matrix.toarray() if m * n <= DENSE_CONSTRAINT_LIMIT else None,
        )

    @property
    def size(self) -> int:
        return int(self.bounds.shape[0])

    @property
    def is_integral(self) -> bool:
        """True when coefficients, bounds and weights are all integers."""
        values = np.concatenate([self.matrix.data, self.bounds, self.lams])
        return bool(np.all(values == np.round(values)))

    def lhs(self, bits: NDArray[np.int8]) -> NDArray[np.float64]:
        return np.asarray(self.matrix @ bits.astype(np.float64), dtype=np.float64)

    def hinge(self, lhs: NDArray[np.float64]) -> float:
        """Total penalty for the given left-hand sides."""
        if not self.size:
            return 0.0
        return float(self.lams @ np.maximum(0.0, self.bounds - lhs))

    def flip_deltas(self, bits: NDArray[np.int8], lhs: NDArray[np.float64]) -> NDArray[np.float64]:
        """Change of the total penalty for flipping each variable."""
        if not self.size:
            return np.zeros(self.n, dtype=np.float64)
        rows, cols = self.term_rows, self.term_cols
        step = self.term_coeffs * (1.0 - 2.0 * bits[cols])
        before = np.maximum(0.0, self.bounds[rows] - lhs[rows])
        after = np.maximum(0.0, self.bounds[rows] - (lhs[rows] + step))
        return np.bincount(cols, weights=self.lams[rows] * (after - before), minlength=self.n)

    def flip_delta(self, bits: NDArray[np.int8], lhs: NDArray[np.float64], i: int) -> float:
        """Change of the total penalty for flipping variable ``i``."""
        if not self.size:
            return 0.0
        start, stop = self.columns.indptr[i], self.columns.indptr[i + 1]
        rows = self.columns.indices[start:stop]
        step = self.columns.data[start:stop] * (1.0 - 2.0 * bits[i])
        before = np.maximum(0.0, self.bounds[rows] - lhs[rows])
        after = np.maximum(0.0, self.bounds[rows] - (lhs[rows] + step))
        return float(self.lams[rows] @ (after - before))

    def pair_deltas(
        self, lhs: NDArray[np.float64], cleared: NDArray[np.int64], set_: NDArray[np.int64]
    ) -> NDArray[np.float64]:
        """Penalty change of clearing ``cleared[p]`` (a 1-bit) and setting ``set_[p]`` (a 0-bit) together."""
        count = cleared.shape[0]
        if not self.size or not count:
            return np.zeros(count, dtype=np.float64)
        if self.dense is not None:
            change = self.dense[:, set_] - self.dense[:, cleared]
            before = np.maximum(0.0, self.bounds - lhs)[:, None]
            after = np.maximum(0.0, (self.bounds - lhs)[:, None] - change)
            return self.lams @ (after - before)
        change = (self.columns[:, set_] - self.columns[:, cleared]).tocoo()
        before = np.maximum(0.0, self.bounds[change.row] - lhs[change.row])
        after = np.maximum(0.0, self.bounds[change.row] - (lhs[change.row] + change.data))
        return np.bincount(change.col, weights=self.lams[change.row] * (after - before), minlength=count)

    def update_lhs(self, lhs: NDArray[np.float64], i: int, sign: float) -> None:
        """Add ``sign * C[:, i]`` to ``lhs`` in place (``sign`` is +1 for a set bit, -1 for a cleared one)."""
        if not self.size:
            return
        start, stop = self.columns.indptr[i], self.columns.indptr[i + 1]
        lhs[self.columns.indices[start:stop]] += sign * self.columns.data[start:stop]


ConstraintsLike = Union[ConstraintSet, Sequence[InequalityConstraint], None]


def _compiled(constraints: ConstraintsLike, n: int) -> ConstraintSet:
    if isinstance(constraints, ConstraintSet):
        if constraints.n != n:
            raise ModelError(f"constraint set was compiled for n={constraints.n}, model has n={n}")
        return constraints
    return ConstraintSet.compile(constraints or (), n)


def evaluate_total(model: QuboModel, constraints: ConstraintsLike, bits: ArrayLike) -> float:
    """QUBO energy of ``bits`` plus the hinge penalty of every constraint."""
    qubo = energy(model, bits)
    compiled = _compiled(constraints, model.n)
    x = np.asarray(bits, dtype=np.int8)
    return qubo + compiled.hinge(compiled.lhs(x))


# ─────────────────────────── one-hot blocks ───────────────────────────


@dataclass(frozen=True)
class OneHotBlocks:
    """
    Contiguous one-hot layout: block ``b`` owns variables ``b*size .. b*size+size-1``.

    For graph partitioning a block is a node and ``size`` is the group count K.
    """

    blocks: int
    size: int

    def __post_init__(self) -> None:
        if self.blocks < 0 or self.size < 1:
            raise ModelError(f"invalid one-hot layout: {self.blocks} blocks of size {self.size}")

    @property
    def n(self) -> int:
        return self.blocks * self.size

    def _matrix(self, bits: ArrayLike) -> NDArray[np.int8]:
        x = np.asarray(bits, dtype=np.int8)
        if x.shape != (self.n,):
            raise ModelError(f"state length {x.shape} does not match {self.blocks} blocks of size {self.size}")
        return x.reshape(self.blocks, self.size)

    def violations(self, bits: ArrayLike) -> tuple[list[int], list[int]]:
        """Blocks with no bit set and blocks with more than one bit set."""
        counts = self._matrix(bits).sum(axis=1)
        return np.flatnonzero(counts == 0).tolist(), np.flatnonzero(counts > 1).tolist()

    def is_feasible(self, bits: ArrayLike) -> bool:
        return bool(np.all(self._matrix(bits).sum(axis=1) == 1))

    def groups_of(self, bits: ArrayLike) -> NDArray[np.int64]:
        """
        Index of the set bit in every block.

        Raises:
            InfeasibleStateError: some block is not one-hot.
        """
        matrix = self._matrix(bits)
        counts = matrix.sum(axis=1)
        bad = np.flatnonzero(counts != 1)
        if bad.size:
            raise InfeasibleStateError(f"{bad.size} block(s) are not one-hot, first is block {bad[0]}", bad.tolist())
        return matrix.argmax(axis=1).astype(np.int64)

    def random_state(self, rng: np.random.Generator) -> NDArray[np.int8]:
        bits = np.zeros((self.blocks, self.size), dtype=np.int8)
        bits[np.arange(self.blocks), rng.integers(self.size, size=self.blocks)] = 1
        return bits.ravel()

    def intra_block_couplings(self, model: QuboModel) -> NDArray[np.float64]:
        """Dense ``(blocks, size, size)`` view of the couplings inside each block."""
        if model.n != self.n:
            raise ModelError(f"model has n={model.n}, block layout covers {self.n} variables")
        out = np.zeros((self.blocks, self.size, self.size), dtype=np.float64)
        coo = model.quad.tocoo()
        inside = coo.row // self.size == coo.col // self.size
        rows, cols = coo.row[inside], coo.col[inside]
        out[rows // self.size, rows % self.size, cols % self.size] = coo.data[inside]
        return out


# ─────────────────────────── step engines ───────────────────────────


@dataclass(frozen=True)
class StepOutcome:
    """
    Result of one Monte Carlo step.

    Attributes:
        accepted_index: Variable set (or flipped) by the applied move, ``None`` if nothing was applied.
        new_offset: Escape offset to use on the next step.
        cleared_index: Variable cleared by a one-hot pair move.
        accepted_count: Candidates whose acceptance draw succeeded before the uniform choice.
        delta: Total energy change (QUBO plus penalties) of the applied move, 0 when none.
    """

    accepted_index: Optional[int]
    new_offset: float
    cleared_index: Optional[int] = None
    accepted_count: int = 0
    delta: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.accepted_index is not None


def acceptance_probabilities(deltas: ArrayLike, temperature: float, offset: float = 0.0) -> NDArray[np.float64]:
    """``min(1, exp(-(delta - offset) / T))`` for every candidate."""
    if temperature <= 0:
        raise ModelError(f"temperature must be positive, got {temperature}")
    d = np.asarray(deltas, dtype=np.float64)
    return np.exp(np.minimum(0.0, -(d - offset) / temperature))


def _lhs_or_compute(compiled: ConstraintSet, state: BitState, lhs: Optional[NDArray[np.float64]]):
    return compiled.lhs(state.bits) if lhs is None else lhs


def _single_flip_totals(
    state: BitState, model: QuboModel, compiled: ConstraintSet, lhs: NDArray[np.float64]
) -> NDArray[np.float64]:
    deltas = flip_deltas(state, model)
    if compiled.size:
        deltas = deltas + compiled.flip_deltas(state.bits, lhs)
    return deltas


def _apply_single(
    state: BitState, model: QuboModel, compiled: ConstraintSet, lhs: NDArray[np.float64], i: int
) -> None:
    sign = 1.0 - 2.0 * float(state.bits[i])
    apply_flip(state, model, i, flip_delta(state, model, i))
    compiled.update_lhs(lhs, i, sign)


def _pick(accepted: NDArray[np.int64], rng: np.random.Generator) -> int:
    return int(accepted[rng.integers(accepted.shape[0])])


def parallel_trial_step(
    state: BitState,
    model: QuboModel,
    constraints: ConstraintsLike,
    temperature: float,
    offset: float,
    rng: np.random.Generator,
    *,
    offset_increment: float,
    lhs: Optional[NDArray[np.float64]] = None,
) -> StepOutcome:
    """
    Try every single-bit flip in parallel and apply at most one.

    ``state`` (and ``lhs`` when given) are updated in place.
    """
    compiled = _compiled(constraints, model.n)
    lhs = _lhs_or_compute(compiled, state, lhs)
    deltas = _single_flip_totals(state, model, compiled, lhs)
    probabilities = acceptance_probabilities(deltas, temperature, offset)
    accepted = np.flatnonzero(rng.random(model.n) < probabilities)
    if not accepted.size:
        return StepOutcome(accepted_index=None, new_offset=offset + offset_increment)
    i = _pick(accepted, rng)
    _apply_single(state, model, compiled, lhs, i)
    return StepOutcome(accepted_index=i, new_offset=0.0, accepted_count=int(accepted.size), delta=float(deltas[i]))


def sequential_sa_step(
    state: BitState,
    model: QuboModel,
    constraints: ConstraintsLike,
    temperature: float,
    rng: np.random.Generator,
    *,
    lhs: Optional[NDArray[np.float64]] = None,
) -> StepOutcome:
    """Metropolis step on one uniformly chosen variable; the offset stays at 0."""
    if temperature <= 0:
        raise ModelError(f"temperature must be positive, got {temperature}")
    if model.n == 0:
        return StepOutcome(accepted_index=None, new_offset=0.0)
    compiled = _compiled(constraints, model.n)
    lhs = _lhs_or_compute(compiled, state, lhs)
    i = int(rng.integers(model.n))
    delta = flip_delta(state, model, i) + compiled.flip_delta(state.bits, lhs, i)
    if rng.random() >= np.exp(min(0.0, -delta / temperature)):
        return StepOutcome(accepted_index=None, new_offset=0.0)
    _apply_single(state, model, compiled, lhs, i)
    return StepOutcome(accepted_index=i, new_offset=0.0, accepted_count=1, delta=float(delta))


def _pair_candidates(
    state: BitState,
    model: QuboModel,
    compiled: ConstraintSet,
    lhs: NDArray[np.float64],
    groups: OneHotBlocks,
    couplings: NDArray[np.float64],
) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
    """Every in-block move as ``(cleared, set, total delta)`` arrays, block-major then target-group order."""
    current = groups.groups_of(state.bits)
    size = groups.size
    targets = np.tile(np.arange(size), (groups.blocks, 1))
    targets = targets[targets != current[:, None]].reshape(groups.blocks, size - 1)
    block_ids = np.repeat(np.arange(groups.blocks), size - 1)
    cleared = block_ids * size + np.repeat(current, size - 1)
    set_ = block_ids * size + targets.ravel()
    single = flip_deltas(state, model)
    # clearing a first shifts the set bit's field by -W_ab
    deltas = single[cleared] + single[set_] - 2.0 * couplings[block_ids, np.repeat(current, size - 1), targets.ravel()]
    if compiled.size:
        deltas = deltas + compiled.pair_deltas(lhs, cleared, set_)
    return cleared, set_, deltas


def structured_onehot_step(
    state: BitState,
    model: QuboModel,
    constraints: ConstraintsLike,
    temperature: float,
    offset: float,
    groups: OneHotBlocks,
    rng: np.random.Generator,
    *,
    offset_increment: float,
    lhs: Optional[NDArray[np.float64]] = None,
    couplings: Optional[NDArray[np.float64]] = None,
) -> StepOutcome:
    """
    Parallel-trial step over one-hot pair moves.

    A move clears the set bit of one block and sets another bit of the same
    block, so the state stays one-hot. Acceptance and offset behave exactly as
    in ``parallel_trial_step``.

    Raises:
        InfeasibleStateError: the input state has a block that is not one-hot.
    """
    compiled = _compiled(constraints, model.n)
    lhs = _lhs_or_compute(compiled, state, lhs)
    if groups.size == 1 or groups.blocks == 0:
        groups.groups_of(state.bits)
        return StepOutcome(accepted_index=None, new_offset=offset + offset_increment)
    if couplings is None:
        couplings = groups.intra_block_couplings(model)
    cleared, set_, deltas = _pair_candidates(state, model, compiled, lhs, groups, couplings)
    probabilities = acceptance_probabilities(deltas, temperature, offset)
    accepted = np.flatnonzero(rng.random(deltas.shape[0]) < probabilities)
    if not accepted.size:
        return StepOutcome(accepted_index=None, new_offset=offset + offset_increment)
    p = _pick(accepted, rng)
    a, b = int(cleared[p]), int(set_[p])
    _apply_single(state, model, compiled, lhs, a)
    _apply_single(state, model, compiled, lhs, b)
    return StepOutcome(
        accepted_index=b,
        new_offset=0.0,
        cleared_index=a,
        accepted_count=int(accepted.size),
        delta=float(deltas[p]),
    )


# ─────────────────────────── schedules ───────────────────────────


def schedule_temperature(schedule: Schedule, step: int) -> float:
    """
    Temperature at ``step`` (0-based).

    Example:
        >>> schedule_temperature(Schedule(t_start=10.0, t_end=0.1, steps=3), 1)
        1.0
    """
    if not 0 <= step < schedule.steps:
        raise ModelError(f"step {step} outside schedule of {schedule.steps} steps")
    if schedule.steps == 1:
        return schedule.t_start
    fraction = step / (schedule.steps - 1)
    if schedule.kind == "linear":
        return schedule.t_start + (schedule.t_end - schedule.t_start) * fraction
    return float(schedule.t_start * (schedule.t_end / schedule.t_start) ** fraction)


def temperature_ladder(schedule: Schedule) -> NDArray[np.float64]:
    """All temperatures of ``schedule`` at once."""
    if schedule.steps == 1:
        return np.array([schedule.t_start])
    fraction = np.arange(schedule.steps, dtype=np.float64) / (schedule.steps - 1)
    if schedule.kind == "linear":
        return schedule.t_start + (schedule.t_end - schedule.t_start) * fraction
    return schedule.t_start * (schedule.t_end / schedule.t_start) ** fraction


def default_offset_increment(model: QuboModel, scale: float = 0.1) -> float:
    """``scale`` times the mean absolute nonzero coupling; ``scale`` for models without couplings."""
    data = np.abs(model.quad.data)
    data = data[data > 0]
    if not data.size:
        return float(scale)
    return float(scale * data.mean())


def default_schedule(
    model: QuboModel,
    constraints: ConstraintsLike,
    bits: ArrayLike,
    request: ScheduleRequest,
    rng: np.random.Generator,
    groups: Optional[OneHotBlocks] = None,
) -> Schedule:
    """
    Resolve ``request`` into a concrete schedule for ``model``.

    Unset temperatures come from random candidate moves on ``bits``: pair moves
    when ``groups`` is given, single flips otherwise.
    """
    t_start = request.t_start
    if t_start is None:
        compiled = _compiled(constraints, model.n)
        state = init_state(model, bits)
        lhs = compiled.lhs(state.bits)
        if groups is not None and groups.size > 1 and groups.blocks:
            _, _, deltas = _pair_candidates(
                state, model, compiled, lhs, groups, groups.intra_block_couplings(model)
            )
        else:
            deltas = _single_flip_totals(state, model, compiled, lhs)
        sampled = deltas[rng.integers(deltas.shape[0], size=request.delta_samples)] if deltas.size else deltas
        t_start = float(np.abs(sampled).max()) if sampled.size else 0.0
        if t_start <= 0:
            t_start = 1.0
    t_end = request.t_end
    if t_end is None:
        t_end = request.t_end_ratio * t_start
        integral = model.is_integral and _compiled(constraints, model.n).is_integral
        if integral:
            t_end = min(t_end, 1.0)
    return Schedule(kind=request.kind, t_start=t_start, t_end=t_end, steps=request.steps)


# ─────────────────────────── driver ───────────────────────────


@dataclass(frozen=True)
class TracePoint:
    step: int
    temperature: float
    offset: float
    current: float
    best: float


@dataclass
class RestartStats:
    """
    Outcome of one restart.

    ``final_energy`` and ``best_energy`` are totals (QUBO plus penalties);
    ``tracking_error`` is the relative gap between the incrementally tracked
    final total and its recomputation.
    """

    restart: int
    final_energy: float
    best_energy: float
    accepted_flips: int
    steps: int
    tracking_error: float = 0.0
    time_limit_reached: bool = False
    trace: list[TracePoint] = field(default_factory=list)


@dataclass(eq=False)
class AnnealResult:
    """Best state over all restarts plus per-restart statistics."""

    best_bits: NDArray[np.int8]
    best_total_energy: float
    per_restart: list[RestartStats]
    schedule: Schedule
    offset_increment: float
    time_limit_reached: bool = False
    elapsed_sec: float = 0.0

    @property
    def best_restart(self) -> int:
        return min(self.per_restart, key=lambda stats: (stats.best_energy, stats.restart)).restart

    @property
    def offset_trace(self) -> Optional[list[float]]:
        """Offsets sampled along the best restart, ``None`` when tracing was off."""
        trace = self.per_restart[self.best_restart].trace
        return [point.offset for point in trace] if trace else None

    @property
    def max_tracking_error(self) -> float:
        return max((stats.tracking_error for stats in self.per_restart), default=0.0)


@dataclass(frozen=True, eq=False)
class _RestartJob:
    model: QuboModel
    constraints: ConstraintSet
    schedule: Schedule
    engine: str
    groups: Optional[OneHotBlocks]
    use_moves: bool
    couplings: Optional[NDArray[np.float64]]
    offset_increment: float
    shared_bits: Optional[NDArray[np.int8]]
    seed: np.random.SeedSequence
    restart: int
    deadline: Optional[float]
    trace_every: Optional[int]


def _initial_bits(model: QuboModel, groups: Optional[OneHotBlocks], rng: np.random.Generator) -> NDArray[np.int8]:
    if groups is not None:
        return groups.random_state(rng)
    return rng.integers(0, 2, size=model.n, dtype=np.int8)


def _stepper(
    job: _RestartJob, state: BitState, rng: np.random.Generator, lhs: NDArray[np.float64]
) -> Callable[[float, float], StepOutcome]:
    """Bind the engine of ``job`` to one restart's state, stream and constraint sums."""
    if job.engine == "sequential-sa":

        def step(temperature: float, _offset: float) -> StepOutcome:
            return sequential_sa_step(state, job.model, job.constraints, temperature, rng, lhs=lhs)

    elif job.use_moves:

        def step(temperature: float, offset: float) -> StepOutcome:
            return structured_onehot_step(
                state,
                job.model,
                job.constraints,
                temperature,
                offset,
                job.groups,
                rng,
                offset_increment=job.offset_increment,
                lhs=lhs,
                couplings=job.couplings,
            )

    else:

        def step(temperature: float, offset: float) -> StepOutcome:
            return parallel_trial_step(
                state, job.model, job.constraints, temperature, offset, rng,
                offset_increment=job.offset_increment, lhs=lhs,
            )

    return step


def _run_restart(job: _RestartJob) -> tuple[RestartStats, NDArray[np.int8]]:
    rng = np.random.default_rng(job.seed)
    bits = job.shared_bits if job.shared_bits is not None else _initial_bits(job.model, job.groups, rng)
    state = init_state(job.model, bits)
    if job.use_moves:
        job.groups.groups_of(state.bits)
    compiled = job.constraints
    lhs = compiled.lhs(state.bits)
    current = state.energy + compiled.hinge(lhs)
    best, best_bits = current, state.bits.copy()
    offset, accepted, steps_done, hit_limit = 0.0, 0, 0, False
    trace: list[TracePoint] = []

    step = _stepper(job, state, rng, lhs)

    for index, temperature in enumerate(temperature_ladder(job.schedule)):
        if job.deadline is not None and index % TIME_CHECK_INTERVAL == 0 and time.time() > job.deadline:
            hit_limit = True
            break
        outcome = step(float(temperature), offset)
        offset = outcome.new_offset
        steps_done += 1
        if outcome.accepted:
            accepted += 1
            current += outcome.delta
            if current < best:
                best, best_bits = current, state.bits.copy()
        if job.trace_every and index % job.trace_every == 0:
            trace.append(TracePoint(index, float(temperature), offset, current, best))

    exact_final = energy(job.model, state.bits) + compiled.hinge(compiled.lhs(state.bits))
    drift = abs(current - exact_final) / max(1.0, abs(exact_final))
    if drift > TRACKING_RTOL:
        LOGGER.warning("restart %d: tracked energy drifted by %.3g (relative)", job.restart, drift)
    best_exact = energy(job.model, best_bits) + compiled.hinge(compiled.lhs(best_bits))
    stats = RestartStats(
        restart=job.restart,
        final_energy=exact_final,
        best_energy=best_exact,
        accepted_flips=accepted,
        steps=steps_done,
        tracking_error=drift,
        time_limit_reached=hit_limit,
        trace=trace,
    )
    return stats, best_bits


def shared_initial_bits(
    model: QuboModel, params: AnnealParams, groups: Optional[OneHotBlocks] = None
) -> NDArray[np.int8]:
    """The state every restart starts from in ``shared`` mode (first spawned stream of the seed)."""
    stream = np.random.SeedSequence(params.seed).spawn(_RESERVED_STREAMS + params.restarts)[0]
    return _initial_bits(model, groups, np.random.default_rng(stream))


def anneal(
    model: QuboModel,
    constraints: ConstraintsLike,
    schedule: Union[Schedule, ScheduleRequest],
    params: Optional[AnnealParams] = None,
    groups: Optional[OneHotBlocks] = None,
) -> AnnealResult:
    """
    Run ``params.restarts`` independent annealing runs and keep the best state.

    ``schedule`` may be a concrete ``Schedule`` or a ``ScheduleRequest`` that is
    resolved on the shared initial state. With ``one_hot_mode="moves"`` and a
    block layout the structured pair moves are used; otherwise single flips.

    Raises:
        ModelError: inconsistent model, constraints, blocks or engine choice.
        InfeasibleStateError: a structured run starts from a non one-hot state.
    """
    params = params or AnnealParams()
    compiled = _compiled(constraints, model.n)
    if groups is not None and groups.n != model.n:
        raise ModelError(f"block layout covers {groups.n} variables, model has n={model.n}")
    use_moves = groups is not None and params.one_hot_mode == "moves"
    if use_moves and params.engine == "sequential-sa":
        raise ModelError("the sequential-sa engine only supports one_hot_mode='penalty'")

    started = time.time()
    deadline = started + params.time_limit_sec if params.time_limit_sec else None
    streams = np.random.SeedSequence(params.seed).spawn(_RESERVED_STREAMS + params.restarts)
    shared = _initial_bits(model, groups, np.random.default_rng(streams[0]))
    if isinstance(schedule, ScheduleRequest):
        schedule = default_schedule(
            model, compiled, shared, schedule, np.random.default_rng(streams[1]), groups if use_moves else None
        )
    increment = (
        params.offset_increment if params.offset_increment is not None else default_offset_increment(model)
    )
    LOGGER.info(
        "annealing n=%d: engine=%s restarts=%d steps=%d t=%.4g->%.4g offset_increment=%.4g moves=%s",
        model.n, params.engine, params.restarts, schedule.steps, schedule.t_start, schedule.t_end,
        increment, use_moves,
    )

    couplings = groups.intra_block_couplings(model) if use_moves else None
    jobs = [
        _RestartJob(
            model=model,
            constraints=compiled,
            schedule=schedule,
            engine=params.engine,
            groups=groups,
            use_moves=use_moves,
            couplings=couplings,
            offset_increment=increment,
            shared_bits=shared if params.initial_state_mode == "shared" else None,
            seed=streams[_RESERVED_STREAMS + r],
            restart=r,
            deadline=deadline,
            trace_every=params.trace_every,
        )
        for r in range(params.restarts)
    ]
    if params.workers > 1 and params.restarts > 1:
        with ProcessPoolExecutor(max_workers=min(params.workers, params.restarts)) as pool:
            outcomes = list(pool.map(_run_restart, jobs))
    else:
        outcomes = [_run_restart(job) for job in jobs]

    per_restart = [stats for stats, _ in outcomes]
    for stats in per_restart:
        LOGGER.debug(
            "restart %d: best=%.6g final=%.6g accepted=%d steps=%d",
            stats.restart, stats.best_energy, stats.final_energy, stats.accepted_flips, stats.steps,
        )
    winner = min(range(len(outcomes)), key=lambda r: (per_restart[r].best_energy, r))
    best_bits = outcomes[winner][1]
    hit_limit = any(stats.time_limit_reached for stats in per_restart)
    if hit_limit:
        LOGGER.warning("time limit of %.3gs reached; reporting best-so-far", params.time_limit_sec)
    result = AnnealResult(
        best_bits=best_bits,
        best_total_energy=evaluate_total(model, compiled, best_bits),
        per_restart=per_restart,
        schedule=schedule,
        offset_increment=increment,
        time_limit_reached=hit_limit,
        elapsed_sec=time.time() - started,
    )
    LOGGER.info("best total energy %.10g (restart %d) in %.2fs", result.best_total_energy, winner, result.elapsed_sec)
    return result
