"""
Modularity-maximising graph partitioning as a QUBO.

Node ``i`` joins one of ``K`` groups through the one-hot block
``x_i0 .. x_i(K-1)`` (variable ``(i, k)`` sits at flat index ``i*K + k``). With
the modularity matrix ``B_ij = (A_ij - gamma k_i k_j / 2m) / 2m`` the
modularity of a one-hot state is ``Q = sum_k sum_ij B_ij x_ik x_jk``, so a
model with couplings ``-B_ij`` between ``(i, k)`` and ``(j, k)`` and linear
terms ``-B_ii`` has energy ``-Q``.

Every group must be non-empty: ``sum_i x_ik >= 1`` for each ``k``, carried as
inequality constraints next to the model. The one-hot rule itself is either
kept by the annealer's pair moves or, in penalty mode, expanded into the model
as ``A * sum_i (sum_k x_ik - 1)**2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qubo_annealer.annealer import OneHotBlocks
from qubo_annealer.errors import EmptyGraphError, ModelError
from qubo_annealer.graph_io import Graph
from qubo_annealer.models.params import InequalityConstraint
from qubo_annealer.qubo_core import QuboModel, build_model_from_arrays

LOGGER = logging.getLogger(__name__)

OneHotMode = Literal["moves", "penalty"]


@dataclass(frozen=True, eq=False)
class PartitionProblem:
    """
    A graph, a group count and the weights of the constraint terms.

    ``one_hot_penalty`` of ``None`` means ``2 * max_i sum_j |B_ij|``; it is only
    used in penalty mode.
    """

    graph: Graph
    k: int
    gamma: float = 1.0
    one_hot_penalty: Optional[float] = None
    nonempty_lambda: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ModelError(f"group count must be >= 1, got {self.k}")
        if not self.gamma > 0:
            raise ModelError(f"resolution gamma must be positive, got {self.gamma}")
        if self.one_hot_penalty is not None and self.one_hot_penalty < 0:
            raise ModelError(f"one-hot penalty must be >= 0, got {self.one_hot_penalty}")
        if self.nonempty_lambda < 0:
            raise ModelError(f"non-empty lambda must be >= 0, got {self.nonempty_lambda}")


@dataclass(frozen=True, eq=False)
class PartitionAssignment:
    """Group index of every node, in ``[0, k)``."""

    group_of: NDArray[np.int64]
    k: int

    def __post_init__(self) -> None:
        if self.group_of.ndim != 1:
            raise ModelError("group_of must be a vector")
        if self.group_of.size and (self.group_of.min() < 0 or self.group_of.max() >= self.k):
            raise ModelError(f"group indices must lie in [0, {self.k})")

    @classmethod
    def of(cls, groups: ArrayLike, k: int) -> "PartitionAssignment":
        return cls(group_of=np.asarray(groups, dtype=np.int64), k=int(k))

    def to_bits(self) -> NDArray[np.int8]:
        """One-hot encoding at flat indices ``i*k + group``."""
        bits = np.zeros((self.group_of.size, self.k), dtype=np.int8)
        bits[np.arange(self.group_of.size), self.group_of] = 1
        return bits.ravel()


@dataclass(frozen=True)
class InfeasibleDecode:
    """Blocks with no bit set and blocks with several bits set."""

    zero_hot: list[int]
    multi_hot: list[int]

    @property
    def violations(self) -> int:
        return len(self.zero_hot) + len(self.multi_hot)


@dataclass(frozen=True)
class ModularityMatrix:
    b: NDArray[np.float64]
    two_m: float


@dataclass(frozen=True)
class BoundaryStats:
    """
    Mean edge weight across groups (boundary) and within groups (interior).

    A mean is ``None`` when its class has no edges.
    """

    boundary_mean: Optional[float]
    interior_mean: Optional[float]
    boundary_count: int
    interior_count: int


@dataclass(frozen=True, eq=False)
class GraphPartitionModel:
    model: QuboModel
    constraints: list[InequalityConstraint]
    groups: OneHotBlocks
    one_hot_penalty: float
    mode: OneHotMode


def _require_edges(graph: Graph) -> None:
    if graph.total_weight_2m <= 0:
        raise EmptyGraphError("graph has no edges (2m = 0); modularity is undefined")


def modularity_matrix(graph: Graph, gamma: float = 1.0) -> ModularityMatrix:
    """
    ``B_ij = (A_ij - gamma k_i k_j / 2m) / 2m`` as a dense matrix, diagonal included.

    Raises:
        EmptyGraphError: the graph has no edges.
    """
    _require_edges(graph)
    two_m = graph.total_weight_2m
    degrees = graph.weighted_degrees
    b = graph.adjacency().toarray() - gamma * np.outer(degrees, degrees) / two_m
    return ModularityMatrix(b=b / two_m, two_m=two_m)


def modularity(graph: Graph, assign: PartitionAssignment, gamma: float = 1.0) -> float:
    """
    Weighted modularity of ``assign``.

    Computed as the intra-group edge share minus ``gamma`` times the summed
    squared group degree shares, which equals the sum of ``B_ij`` over
    same-group ordered pairs.

    Raises:
        EmptyGraphError: the graph has no edges.
        ModelError: the assignment does not cover every node.
    """
    _require_edges(graph)
    if assign.group_of.shape != (graph.n,):
        raise ModelError(f"assignment covers {assign.group_of.size} nodes, graph has {graph.n}")
    two_m = graph.total_weight_2m
    same = assign.group_of[graph.u] == assign.group_of[graph.v]
    intra = 2.0 * float(graph.w[same].sum()) / two_m
    group_degree = np.bincount(assign.group_of, weights=graph.weighted_degrees, minlength=assign.k)
    return intra - gamma * float(np.sum((group_degree / two_m) ** 2))


def one_hot_penalty_default(matrix: ModularityMatrix) -> float:
    """``2 * max_i sum_j |B_ij|``: larger than any modularity gain from breaking one block."""
    return float(2.0 * np.abs(matrix.b).sum(axis=1).max())


def build_graph_partition(problem: PartitionProblem, mode: OneHotMode = "moves") -> GraphPartitionModel:
    """
    Build the partitioning model, its non-empty-group constraints and the block layout.

    In ``moves`` mode the model holds only ``-Q``; in ``penalty`` mode the
    one-hot penalty is added to it as well.

    Raises:
        EmptyGraphError: the graph has no edges.
    """
    graph, k = problem.graph, problem.k
    matrix = modularity_matrix(graph, problem.gamma)
    n = graph.n
    iu, ju = np.triu_indices(n, k=1)
    pair_values = -matrix.b[iu, ju]
    keep = pair_values != 0
    iu, ju, pair_values = iu[keep], ju[keep], pair_values[keep]
    group_ids = np.arange(k)
    rows = (iu[:, None] * k + group_ids).ravel()
    cols = (ju[:, None] * k + group_ids).ravel()
    values = np.repeat(pair_values, k)
    lin = np.repeat(-np.diag(matrix.b), k)
    offset = 0.0

    penalty = problem.one_hot_penalty
    if penalty is None:
        penalty = one_hot_penalty_default(matrix)
    if mode == "penalty":
        # A * (sum_k x_ik - 1)^2 = A * (2 sum_{k<l} x_ik x_il - sum_k x_ik + 1)
        kk, ll = np.triu_indices(k, k=1)
        blocks = np.arange(n)[:, None] * k
        rows = np.concatenate([rows, (blocks + kk).ravel()])
        cols = np.concatenate([cols, (blocks + ll).ravel()])
        values = np.concatenate([values, np.full(n * kk.size, penalty)])
        lin = lin - penalty
        offset = penalty * n
    elif mode != "moves":
        raise ModelError(f"unknown one-hot mode {mode!r}")

    model = build_model_from_arrays(n * k, rows, cols, values, lin, offset)
    constraints = [
        InequalityConstraint(terms=[(i * k + g, 1) for i in range(n)], bound=1, lam=problem.nonempty_lambda)
        for g in range(k)
    ]
    LOGGER.debug(
        "graph partition model: %d nodes, K=%d, %d variables, %d couplings, mode=%s",
        n, k, model.n, model.num_interactions, mode,
    )
    return GraphPartitionModel(
        model=model,
        constraints=constraints,
        groups=OneHotBlocks(blocks=n, size=k),
        one_hot_penalty=float(penalty),
        mode=mode,
    )


def decode_partition(bits: ArrayLike, n: int, k: int) -> Union[PartitionAssignment, InfeasibleDecode]:
    """
    Read the group of every node from one-hot blocks.

    Returns an ``InfeasibleDecode`` listing the offending blocks when any block
    is not exactly one-hot.
    """
    x = np.asarray(bits, dtype=np.int8)
    if x.shape != (n * k,):
        raise ModelError(f"state length {x.shape} does not match {n} nodes x {k} groups")
    blocks = OneHotBlocks(blocks=n, size=k)
    zero_hot, multi_hot = blocks.violations(x)
    if zero_hot or multi_hot:
        return InfeasibleDecode(zero_hot=zero_hot, multi_hot=multi_hot)
    return PartitionAssignment(group_of=blocks.groups_of(x), k=k)


def group_sizes(assign: PartitionAssignment) -> NDArray[np.int64]:
    return np.bincount(assign.group_of, minlength=assign.k)


def empty_groups(assign: PartitionAssignment) -> list[int]:
    return np.flatnonzero(group_sizes(assign) == 0).tolist()


def boundary_weight_stats(graph: Graph, assign: PartitionAssignment) -> BoundaryStats:
    """Mean weight and count of edges crossing groups versus edges inside a group."""
    if assign.group_of.shape != (graph.n,):
        raise ModelError(f"assignment covers {assign.group_of.size} nodes, graph has {graph.n}")
    crossing = assign.group_of[graph.u] != assign.group_of[graph.v]
    boundary, interior = graph.w[crossing], graph.w[~crossing]
    return BoundaryStats(
        boundary_mean=float(boundary.mean()) if boundary.size else None,
        interior_mean=float(interior.mean()) if interior.size else None,
        boundary_count=int(boundary.size),
        interior_count=int(interior.size),
    )
