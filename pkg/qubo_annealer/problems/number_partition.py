"""
Number partitioning as a QUBO.

Split a multiset ``S`` of positive integers into ``A`` and ``B`` with the
smallest difference ``D = |sum(B) - sum(A)| = |c - 2 sum_j S_j x_j|`` where
``c = sum(S)`` and ``x_j = 1`` puts ``S_j`` into ``A``. Expanding ``D**2``
gives ``c**2 + 4 x^T Q x`` with ``Q_ii = S_i (S_i - c)`` and
``Q_ij = S_i S_j``; the stored model folds the factor 4 into the coefficients
and ``c**2`` into the offset so that its energy is ``D**2`` itself.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO, Union

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from qubo_annealer.errors import ModelError
from qubo_annealer.qubo_core import QuboModel

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NumberSet:
    """Positive integers ``S_j`` and their total ``c``."""

    values: NDArray[np.int64]

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size == 0:
            raise ModelError("a number set needs at least one value")
        if np.any(self.values < 1):
            raise ModelError(f"values must be positive integers, got {int(self.values.min())}")

    @classmethod
    def of(cls, values: Iterable[int]) -> "NumberSet":
        raw = list(values)
        arr = np.asarray(raw, dtype=np.int64)
        if any(int(value) != value for value in raw):
            raise ModelError("values must be integers")
        return cls(values=arr)

    @property
    def total(self) -> int:
        return int(self.values.sum())

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class NumberPartitionResult:
    """Side sums and difference of a decoded partition."""

    sum_a: int
    sum_b: int
    d: int

    @property
    def energy(self) -> int:
        return self.d * self.d


def number_partition_matrix(s: NumberSet) -> NDArray[np.int64]:
    """
    The unscaled matrix ``Q`` with ``D**2 = c**2 + 4 x^T Q x``.

    Example:
        >>> number_partition_matrix(NumberSet.of([2, 3, 5])).tolist()
        [[-16, 6, 10], [6, -21, 15], [10, 15, -25]]
    """
    values = s.values
    matrix = np.outer(values, values)
    np.fill_diagonal(matrix, values * (values - s.total))
    return matrix


def build_number_partition(s: NumberSet) -> QuboModel:
    """
    QUBO model whose energy at ``x`` is ``D(x)**2``.

    ``lin[i] = 4 S_i (S_i - c)``, ``W[i][j] = 4 S_i S_j`` and ``offset = c**2``.
    The coupling matrix is dense, so memory grows with ``len(s)**2``.
    """
    values = s.values.astype(np.float64)
    total = float(s.total)
    coupling = 4.0 * np.outer(values, values)
    np.fill_diagonal(coupling, 0.0)
    quad = sp.csr_matrix(coupling)
    quad.sort_indices()
    lin = 4.0 * values * (values - total)
    LOGGER.debug("number partition model: n=%d, c=%d", len(s), s.total)
    return QuboModel(n=len(s), quad=quad, lin=lin, offset=total * total)


def decode_number_partition(s: NumberSet, bits: ArrayLike) -> NumberPartitionResult:
    """Side sums for ``bits`` (``1`` = side A) and ``D = |sum_b - sum_a|``."""
    x = np.asarray(bits)
    if x.shape != s.values.shape:
        raise ModelError(f"state length {x.shape[0] if x.ndim == 1 else x.shape} does not match {len(s)} values")
    sum_a = int(s.values @ x.astype(np.int64))
    sum_b = s.total - sum_a
    return NumberPartitionResult(sum_a=sum_a, sum_b=sum_b, d=abs(sum_b - sum_a))


def generate_number_set(n: int, max_value: int, seed: int) -> NumberSet:
    """``n`` uniform integers in ``[1, max_value]`` drawn from ``seed``."""
    if n < 1 or max_value < 1:
        raise ModelError(f"need n >= 1 and max_value >= 1, got n={n}, max_value={max_value}")
    rng = np.random.default_rng(seed)
    return NumberSet(values=rng.integers(1, max_value + 1, size=n, dtype=np.int64))


def read_number_set(source: Union[str, Path, TextIO]) -> NumberSet:
    """
    Read one positive integer per line; blank lines and ``#`` comments are skipped.

    Raises:
        ModelError: unparsable or non-positive value (with its line number), or no values.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rt", encoding="utf-8") as input_file:
            text = input_file.read()
    else:
        text = source.read()
    values: list[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value = int(line)
        except ValueError as e:
            raise ModelError(f"line {number}: not an integer: {line!r}") from e
        if value < 1:
            raise ModelError(f"line {number}: values must be positive, got {value}")
        values.append(value)
    return NumberSet.of(values)


def karmarkar_karp(s: NumberSet) -> int:
    """Difference reached by the largest differencing method."""
    heap = [-int(value) for value in s.values]
    heapq.heapify(heap)
    while len(heap) > 1:
        largest = -heapq.heappop(heap)
        second = -heapq.heappop(heap)
        heapq.heappush(heap, -(largest - second))
    return -heap[0]
