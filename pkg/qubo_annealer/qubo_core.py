"""
QUBO model representation, exact and incremental energy evaluation, and the
Ising <-> QUBO conversions.

Conventions used throughout the package:

* ``quad`` is a symmetric ``scipy.sparse.csr_matrix`` with an empty diagonal.
  Each unordered pair ``{i, j}`` carries one coefficient ``W[i][j]``; the
  matrix holds it in both orientations so that a row slice gives every
  neighbour of a variable.
* The energy is the full symmetric bilinear form
  ``E(x) = offset + sum_i h[i] x_i + sum_{i != j} W[i][j] x_i x_j``,
  i.e. every pair is counted twice.
* ``BitState.fields[i] = h[i] + sum_j W[i][j] x_j`` so that flipping bit ``i``
  changes the energy by ``(1 - 2 x_i) (2 fields[i] - h[i])``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from qubo_annealer.errors import ModelError

LOGGER = logging.getLogger(__name__)

# relative tolerance for float tracking checks
TRACKING_RTOL = 1e-9


@dataclass(frozen=True)
class QuboModel:
    """
    Immutable QUBO model over ``n`` binary variables.

    Attributes:
        n: Number of binary variables.
        quad: Symmetric sparse coupling matrix, zero diagonal.
        lin: Linear coefficients ``h``, shape ``(n,)``.
        offset: Constant energy term.
    """

    n: int
    quad: sp.csr_matrix
    lin: NDArray[np.float64]
    offset: float = 0.0

    def coefficient(self, i: int, j: int) -> float:
        """Coupling ``W[i][j]``; diagonal queries return 0 (folded into ``lin``)."""
        _check_index(i, self.n)
        _check_index(j, self.n)
        if i == j:
            return 0.0
        return float(self.quad[i, j])

    def quadratic_terms(self) -> Iterator[tuple[int, int, float]]:
        """Iterate ``(i, j, W[i][j])`` once per unordered pair, ``i < j``."""
        upper = sp.triu(self.quad, k=1).tocoo()
        for i, j, w in zip(upper.row, upper.col, upper.data):
            yield int(i), int(j), float(w)

    @property
    def num_interactions(self) -> int:
        return int(self.quad.nnz // 2)

    @property
    def is_integral(self) -> bool:
        """True when every coefficient (and the offset) is an integer value."""
        values = np.concatenate([self.quad.data, self.lin, [self.offset]])
        return bool(np.all(np.floor(values) == values))

    def neighbours(self, i: int) -> tuple[NDArray[np.int32], NDArray[np.float64]]:
        start, stop = self.quad.indptr[i], self.quad.indptr[i + 1]
        return self.quad.indices[start:stop], self.quad.data[start:stop]


@dataclass
class BitState:
    """
    Mutable assignment of the model's variables with tracked energy and fields.

    Single-owner: the annealer holds one per restart.
    """

    bits: NDArray[np.int8]
    fields: NDArray[np.float64]
    energy: float

    def copy(self) -> "BitState":
        return BitState(bits=self.bits.copy(), fields=self.fields.copy(), energy=self.energy)


@dataclass(frozen=True)
class IsingModel:
    """
    Spin model ``E(s) = -sum_{i != j} w_ij s_i s_j - sum_i h_i s_i`` with ``s_i`` in {-1, +1}.

    ``couplings`` is symmetric with an empty diagonal; the double sum runs over
    ordered pairs, so each unordered pair contributes ``-2 w_ij s_i s_j``.
    """

    n: int
    couplings: sp.csr_matrix
    biases: NDArray[np.float64]
    offset: float = 0.0


def _check_index(i: int, n: int) -> None:
    if not 0 <= int(i) < n:
        raise ModelError(f"variable index {i} out of range for n={n}")


def _as_bits(model_n: int, bits: ArrayLike) -> NDArray[np.int8]:
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.shape[0] != model_n:
        raise ModelError(f"state length {arr.shape[0] if arr.ndim == 1 else arr.shape} does not match n={model_n}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ModelError("state must be a 0/1 vector")
    return arr.astype(np.int8)


def _symmetric_from_pairs(
    n: int, rows: NDArray[np.int64], cols: NDArray[np.int64], values: NDArray[np.float64]
) -> sp.csr_matrix:
    """Sum duplicate unordered pairs and mirror them into a symmetric CSR matrix."""
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    upper = sp.coo_matrix((values, (lo, hi)), shape=(n, n)).tocsr()
    upper.sum_duplicates()
    upper.eliminate_zeros()
    full = (upper + upper.T).tocsr()
    full.sort_indices()
    return full


def build_model_from_arrays(
    n: int,
    rows: ArrayLike,
    cols: ArrayLike,
    values: ArrayLike,
    linear: ArrayLike | None = None,
    offset: float = 0.0,
) -> QuboModel:
    """
    Assemble a model from coordinate arrays of quadratic terms.

    Duplicate pairs are summed regardless of orientation and ``(i, i)`` entries
    are folded into the linear part (``x * x == x`` for binary ``x``).

    Raises:
        ModelError: index out of range or a non-finite coefficient.
    """
    if n < 0:
        raise ModelError(f"variable count must be non-negative, got {n}")
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if not rows.shape == cols.shape == values.shape:
        raise ModelError("quadratic row/col/value arrays must have the same length")
    lin = np.zeros(n, dtype=np.float64) if linear is None else np.array(linear, dtype=np.float64).ravel()
    if lin.shape != (n,):
        raise ModelError(f"linear vector has length {lin.shape[0]}, expected {n}")

    for name, arr in (("row", rows), ("col", cols)):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            bad = arr[(arr < 0) | (arr >= n)][0]
            raise ModelError(f"quadratic {name} index {bad} out of range for n={n}")
    if not np.all(np.isfinite(values)) or not np.all(np.isfinite(lin)) or not np.isfinite(offset):
        raise ModelError("coefficients must be finite")

    diagonal = rows == cols
    if np.any(diagonal):
        np.add.at(lin, rows[diagonal], values[diagonal])
    off = ~diagonal
    quad = _symmetric_from_pairs(n, rows[off], cols[off], values[off])
    return QuboModel(n=n, quad=quad, lin=lin, offset=float(offset))


def build_model(
    n: int,
    quadratic_terms: Iterable[tuple[int, int, float]] = (),
    linear_terms: Iterable[tuple[int, float]] = (),
    offset: float = 0.0,
) -> QuboModel:
    """
    Build a model from ``(i, j, coeff)`` and ``(i, coeff)`` term lists.

    Example:
        >>> m = build_model(1, [(0, 0, 3.0)], [(0, 2.0)])
        >>> float(m.lin[0]), m.num_interactions
        (5.0, 0)
    """
    quad = list(quadratic_terms)
    linear = list(linear_terms)
    lin = np.zeros(n, dtype=np.float64)
    for i, coeff in linear:
        _check_index(i, n)
        if not np.isfinite(coeff):
            raise ModelError(f"non-finite linear coefficient for variable {i}")
        lin[int(i)] += float(coeff)
    if quad:
        rows, cols, values = (np.asarray(col) for col in zip(*quad))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        values = np.zeros(0, dtype=np.float64)
    return build_model_from_arrays(n, rows, cols, values, lin, offset)


def energy(model: QuboModel, bits: ArrayLike) -> float:
    """Exact energy of ``bits``: ``offset + h.x + x^T W x``."""
    x = _as_bits(model.n, bits).astype(np.float64)
    return float(model.offset + model.lin @ x + x @ (model.quad @ x))


def batch_energy(model: QuboModel, states: ArrayLike) -> NDArray[np.float64]:
    """Energies of a ``(k, n)`` stack of states."""
    x = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if x.shape[1] != model.n:
        raise ModelError(f"states have {x.shape[1]} columns, expected {model.n}")
    coupled = np.asarray((model.quad @ x.T).T)
    return model.offset + x @ model.lin + np.einsum("ij,ij->i", coupled, x)


def brute_force_minimum(model: QuboModel, max_variables: int = 22) -> tuple[NDArray[np.int8], float]:
    """
    Exhaustive minimum over all ``2**n`` states (first minimiser in binary order).

    Raises:
        ModelError: the model is larger than ``max_variables``.
    """
    n = model.n
    if n > max_variables:
        raise ModelError(f"exhaustive search over n={n} exceeds the limit of {max_variables} variables")
    best_bits = np.zeros(n, dtype=np.int8)
    best = energy(model, best_bits)
    chunk = 1 << min(n, 16)
    powers = 1 << np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        states = ((codes[:, None] & powers) > 0).astype(np.int8)
        values = batch_energy(model, states)
        k = int(np.argmin(values))
        if values[k] < best:
            best, best_bits = float(values[k]), states[k].copy()
    return best_bits, best


def init_state(model: QuboModel, bits: ArrayLike) -> BitState:
    """Build a ``BitState`` with fields and energy computed from scratch."""
    x = _as_bits(model.n, bits)
    xf = x.astype(np.float64)
    coupled = model.quad @ xf
    fields = model.lin + coupled
    total = float(model.offset + model.lin @ xf + xf @ coupled)
    return BitState(bits=x.copy(), fields=np.asarray(fields, dtype=np.float64), energy=total)


def flip_deltas(state: BitState, model: QuboModel) -> NDArray[np.float64]:
    """Energy change of flipping each bit, for all bits at once."""
    sign = 1.0 - 2.0 * state.bits
    return sign * (2.0 * state.fields - model.lin)


def flip_delta(state: BitState, model: QuboModel, i: int) -> float:
    """Energy change of flipping bit ``i``: ``(1 - 2 x_i) (h_i + 2 sum_j W_ij x_j)``."""
    _check_index(i, model.n)
    sign = 1.0 - 2.0 * float(state.bits[i])
    return sign * (2.0 * float(state.fields[i]) - float(model.lin[i]))


def apply_flip(state: BitState, model: QuboModel, i: int, delta: float) -> BitState:
    """
    Toggle bit ``i`` in place, updating the neighbours' fields by ``+-W[i][j]``.

    ``delta`` must be ``flip_delta(state, model, i)``; it is added to the
    tracked energy as given.
    """
    _check_index(i, model.n)
    sign = 1.0 - 2.0 * float(state.bits[i])
    cols, vals = model.neighbours(i)
    state.fields[cols] += sign * vals
    state.bits[i] ^= 1
    state.energy += float(delta)
    return state


def build_ising(
    n: int,
    couplings: Iterable[tuple[int, int, float]] = (),
    biases: Sequence[float] | None = None,
    offset: float = 0.0,
) -> IsingModel:
    """
    Assemble an ``IsingModel``; couplings are summed per unordered pair.

    Raises:
        ModelError: self-coupling, index out of range or non-finite value.
    """
    terms = list(couplings)
    for i, j, w in terms:
        _check_index(i, n)
        _check_index(j, n)
        if i == j:
            raise ModelError(f"Ising couplings must have a zero diagonal, got ({i}, {j})")
        if not np.isfinite(w):
            raise ModelError(f"non-finite coupling for ({i}, {j})")
    h = np.zeros(n, dtype=np.float64) if biases is None else np.array(biases, dtype=np.float64)
    if h.shape != (n,):
        raise ModelError(f"bias vector has length {h.shape[0]}, expected {n}")
    if terms:
        rows, cols, values = (np.asarray(col) for col in zip(*terms))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        values = np.zeros(0, dtype=np.float64)
    w = _symmetric_from_pairs(n, np.asarray(rows, np.int64), np.asarray(cols, np.int64), np.asarray(values, float))
    return IsingModel(n=n, couplings=w, biases=h, offset=float(offset))


def ising_energy(ising: IsingModel, spins: ArrayLike) -> float:
    """Energy of a +-1 spin vector under the Ising model."""
    s = np.asarray(spins, dtype=np.float64)
    if s.shape != (ising.n,):
        raise ModelError(f"spin vector length {s.shape} does not match n={ising.n}")
    if not np.all(np.abs(s) == 1.0):
        raise ModelError("spins must be +1 or -1")
    return float(ising.offset - s @ (ising.couplings @ s) - ising.biases @ s)


def ising_to_qubo(ising: IsingModel) -> QuboModel:
    """
    Rewrite an Ising model over binaries ``b = (s + 1) / 2``.

    With ``s = 2b - 1`` each pair term ``-2 w (2b_i - 1)(2b_j - 1)`` becomes
    ``-8 w b_i b_j + 4 w b_i + 4 w b_j - 2 w``, i.e. ``W_ij = -4 w_ij``; each
    bias term ``-h (2b - 1)`` becomes ``-2 h b + h``.
    """
    upper = sp.triu(ising.couplings, k=1).tocoo()
    w = upper.data
    lin = -2.0 * ising.biases.copy()
    np.add.at(lin, upper.row, 4.0 * w)
    np.add.at(lin, upper.col, 4.0 * w)
    offset = ising.offset + float(ising.biases.sum()) - 2.0 * float(w.sum())
    return build_model_from_arrays(ising.n, upper.row, upper.col, -4.0 * w, lin, offset)


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Inverse of ``ising_to_qubo``: rewrite the model over spins ``s = 2b - 1``."""
    upper = sp.triu(model.quad, k=1).tocoo()
    w_qubo = upper.data
    # b_i b_j = (s_i s_j + s_i + s_j + 1) / 4, counted twice in the energy
    couplings = -w_qubo / 4.0
    h_spin = model.lin / 2.0
    np.add.at(h_spin, upper.row, w_qubo / 2.0)
    np.add.at(h_spin, upper.col, w_qubo / 2.0)
    offset = model.offset + float(model.lin.sum()) / 2.0 + float(w_qubo.sum()) / 2.0
    terms = zip(upper.row.tolist(), upper.col.tolist(), couplings.tolist())
    return build_ising(model.n, terms, -h_spin, offset)

