"""
Graph ingestion, bundled reference datasets and graph utilities.

Two input formats are supported:

* edge lists, whitespace separated ``u v [w]`` lines with ``#`` comments;
  duplicate undirected edges are merged by summing their weights;
* electrical line tables, CSV with the header ``from_bus,to_bus,r_ohm,x_ohm``;
  every line gets the admittance magnitude ``1 / |r + jx|`` as its weight and
  parallel lines between the same bus pair are dropped after the first one.

The bundled datasets in ``qubo_annealer/data`` are read through the same
loaders.
"""

from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Hashable, Iterable, Optional, TextIO, Union

import networkx as nx
import numpy as np
import pandas as pd
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.csgraph import connected_components

from qubo_annealer.errors import GraphFormatError

LOGGER = logging.getLogger(__name__)

NODES_HEADER = "nodes:"
LABELS_HEADER = "labels:"

ELECTRICAL_COLUMNS = ("from_bus", "to_bus", "r_ohm", "x_ohm")

BUILTIN_DATASETS = {
    "karate": ("karate.edges", "edges"),
    "ieee33": ("ieee33_lines.csv", "electrical"),
    "ieee118": ("ieee118_lines.csv", "electrical"),
}

Source = Union[str, Path, TextIO]


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Weighted undirected simple graph over nodes ``0 .. n-1``.

    Attributes:
        n: Node count
        u: First endpoint of every edge (``u < v``)
        v: Second endpoint of every edge
        w: Positive finite edge weights
        labels: Original node identifiers in index order (bus numbers, member ids)
        weighted_degrees: ``k_i``, the summed weight of the edges at node ``i``
        total_weight_2m: ``2m``, twice the summed edge weight
    """

    n: int
    u: NDArray[np.int64]
    v: NDArray[np.int64]
    w: NDArray[np.float64]
    labels: tuple[Hashable, ...]
    weighted_degrees: NDArray[np.float64] = field(repr=False)
    total_weight_2m: float

    @property
    def edge_count(self) -> int:
        return int(self.w.shape[0])

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix ``A``."""
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        return sp.csr_matrix((np.concatenate([self.w, self.w]), (rows, cols)), shape=(self.n, self.n))

    def index_of(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise KeyError(f"unknown node label {label!r}") from e


@dataclass(frozen=True)
class ElectricalLine:
    """
    One line of an electrical table, impedance in ohms.

    Raises:
        GraphFormatError: non-finite impedance, negative resistance, ``r = x = 0``
            or a line from a bus to itself.
    """

    from_bus: str
    to_bus: str
    r: float
    x: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and math.isfinite(self.x)):
            raise GraphFormatError(f"impedance ({self.r}, {self.x}) is not finite")
        if self.r < 0:
            raise GraphFormatError(f"negative resistance {self.r}")
        if self.r == 0 and self.x == 0:
            raise GraphFormatError("zero impedance gives an infinite weight")
        if self.from_bus == self.to_bus:
            raise GraphFormatError(f"line connects bus {self.from_bus} to itself")

    @property
    def weight(self) -> float:
        """Admittance magnitude ``1 / |r + jx|`` in ohm^-1."""
        return 1.0 / math.hypot(self.r, self.x)


def build_graph(
    n: int,
    edges: Iterable[tuple[int, int, float]],
    labels: Optional[Iterable[Hashable]] = None,
) -> Graph:
    """
    Build a ``Graph``; duplicate undirected edges are summed.

    Raises:
        GraphFormatError: self-loop, node id out of range, non-positive or non-finite weight.
    """
    merged: dict[tuple[int, int], float] = {}
    for a, b, weight in edges:
        a, b = int(a), int(b)
        if a == b:
            raise GraphFormatError(f"self-loop on node {a}")
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"edge ({a}, {b}) references a node outside 0..{n - 1}")
        if not math.isfinite(weight) or weight <= 0:
            raise GraphFormatError(f"edge ({a}, {b}) has non-positive or non-finite weight {weight}")
        key = (min(a, b), max(a, b))
        merged[key] = merged.get(key, 0.0) + float(weight)

    ordered = sorted(merged.items())
    u = np.array([key[0] for key, _ in ordered], dtype=np.int64)
    v = np.array([key[1] for key, _ in ordered], dtype=np.int64)
    w = np.array([weight for _, weight in ordered], dtype=np.float64)
    degrees = np.bincount(u, weights=w, minlength=n) + np.bincount(v, weights=w, minlength=n)
    label_tuple = tuple(range(n)) if labels is None else tuple(labels)
    if len(label_tuple) != n:
        raise GraphFormatError(f"{len(label_tuple)} labels given for {n} nodes")
    return Graph(
        n=n,
        u=u,
        v=v,
        w=w,
        labels=label_tuple,
        weighted_degrees=degrees.astype(np.float64),
        total_weight_2m=float(2.0 * w.sum()),
    )


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        with open(source, "rt", encoding="utf-8") as input_file:
            return input_file.read()
    return source.read()


def load_edge_list(source: Source) -> Graph:
    """
    Load a whitespace separated ``u v [w]`` edge list.

    Node ids are non-negative integers and the node count is ``1 + max id``;
    ``w`` defaults to 1.0. Lines starting with ``#`` and blank lines are skipped,
    apart from the ``# nodes: N`` and ``# labels: [...]`` headers written by
    ``write_edge_list``, which set the node count and the node labels.

    Raises:
        GraphFormatError: malformed line (with its 1-based number), self-loop,
            non-positive weight or an edge beyond a declared node count.

    Example:
        >>> g = load_edge_list(io.StringIO("0 1\\n1 2\\n"))
        >>> g.n, g.weighted_degrees.tolist()
        (3, [1.0, 2.0, 1.0])
    """
    edges: list[tuple[int, int, float]] = []
    max_id = -1
    declared_n: Optional[int] = None
    labels: Optional[list[Hashable]] = None
    for number, raw in enumerate(_read_text(source).splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            header = line[1:].strip()
            if header.startswith(NODES_HEADER):
                try:
                    declared_n = int(header[len(NODES_HEADER) :])
                except ValueError as e:
                    raise GraphFormatError(f"cannot parse node count in {line!r}", line=number) from e
                if declared_n < 0:
                    raise GraphFormatError(f"negative node count in {line!r}", line=number)
            elif header.startswith(LABELS_HEADER):
                try:
                    labels = json.loads(header[len(LABELS_HEADER) :])
                except json.JSONDecodeError as e:
                    raise GraphFormatError(f"cannot parse labels in {line!r}", line=number) from e
                if not isinstance(labels, list):
                    raise GraphFormatError("labels header must hold a JSON list", line=number)
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected 'u v [w]', got {line!r}", line=number)
        try:
            a, b = int(parts[0]), int(parts[1])
            weight = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as e:
            raise GraphFormatError(f"cannot parse {line!r}", line=number) from e
        if a < 0 or b < 0:
            raise GraphFormatError(f"node ids must be non-negative, got {line!r}", line=number)
        if a == b:
            raise GraphFormatError(f"self-loop on node {a}", line=number)
        if not math.isfinite(weight) or weight <= 0:
            raise GraphFormatError(f"weight must be positive and finite, got {parts[2]}", line=number)
        edges.append((a, b, weight))
        max_id = max(max_id, a, b)
    n = max_id + 1
    if declared_n is not None:
        if max_id >= declared_n:
            raise GraphFormatError(f"node {max_id} exceeds the declared node count {declared_n}")
        n = declared_n
    if labels is not None and len(labels) != n:
        raise GraphFormatError(f"{len(labels)} labels declared for {n} nodes")
    graph = build_graph(n, edges, labels)
    LOGGER.debug("loaded edge list: %d nodes, %d edges", graph.n, graph.edge_count)
    return graph


def write_edge_list(graph: Graph, stream: TextIO) -> None:
    """
    Write ``graph`` in the edge-list format read by ``load_edge_list``.

    The node count is always written as a header. Labels are written too
    unless they are the default ``0..n-1``; only ``str`` and ``int`` labels
    can be written.
    """
    stream.write(f"# {NODES_HEADER} {graph.n}\n")
    if graph.labels != tuple(range(graph.n)):
        if not all(isinstance(label, (str, int)) for label in graph.labels):
            raise GraphFormatError("only str and int labels can be written to an edge list")
        stream.write(f"# {LABELS_HEADER} {json.dumps(list(graph.labels))}\n")
    stream.write("# format: u v weight\n")
    for a, b, weight in graph.edges:
        stream.write(f"{a} {b} {weight!r}\n")


def load_electrical_lines(source: Source) -> Graph:
    """
    Load an electrical line table and weight every line by ``1 / |r + jx|`` (ohm^-1).

    Bus ids are kept as labels and mapped to dense indices in order of first
    appearance. Of several lines between the same bus pair only the first is
    kept.

    Raises:
        GraphFormatError: missing columns, unparsable values, negative resistance,
            ``r = x = 0`` or a line connecting a bus to itself.
    """
    text = _read_text(source)
    try:
        frame = pd.read_csv(io.StringIO(text), dtype={"from_bus": str, "to_bus": str}, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise GraphFormatError(f"malformed electrical CSV: {e}") from e
    missing = [column for column in ELECTRICAL_COLUMNS if column not in frame.columns]
    if missing:
        raise GraphFormatError(f"electrical CSV is missing column(s) {', '.join(missing)}", line=1)

    index: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    dropped = 0
    for row_number, row in enumerate(frame.itertuples(index=False), start=2):
        from_bus, to_bus = str(row.from_bus).strip(), str(row.to_bus).strip()
        if from_bus in ("", "nan") or to_bus in ("", "nan"):
            raise GraphFormatError("bus id missing", line=row_number)
        try:
            r, x = float(row.r_ohm), float(row.x_ohm)
        except (TypeError, ValueError) as e:
            raise GraphFormatError(f"cannot parse impedance ({row.r_ohm}, {row.x_ohm})", line=row_number) from e
        try:
            line = ElectricalLine(from_bus, to_bus, r, x)
        except GraphFormatError as e:
            raise GraphFormatError(str(e), line=row_number) from e
        a = index.setdefault(from_bus, len(index))
        b = index.setdefault(to_bus, len(index))
        pair = (min(a, b), max(a, b))
        if pair in seen:
            dropped += 1
            continue
        seen.add(pair)
        edges.append((a, b, line.weight))

    if dropped:
        LOGGER.info("dropped %d parallel line(s)", dropped)
    return build_graph(len(index), edges, labels=list(index))


def _bundled(name: str) -> str:
    return resources.files("qubo_annealer").joinpath("data", name).read_text(encoding="utf-8")


def karate_club() -> Graph:
    """Zachary's weighted karate club network: 34 nodes, 78 edges."""
    return load_edge_list(io.StringIO(_bundled("karate.edges")))


def ieee33_bus() -> Graph:
    """Baran-Wu 33-bus distribution feeder (32 lines)."""
    return load_electrical_lines(io.StringIO(_bundled("ieee33_lines.csv")))


def ieee118_bus() -> Graph:
    """IEEE 118-bus test case, all branches weighted by admittance magnitude."""
    return load_electrical_lines(io.StringIO(_bundled("ieee118_lines.csv")))


def load_builtin(name: str) -> Graph:
    """
    Load a bundled dataset by name (``karate``, ``ieee33`` or ``ieee118``).

    Raises:
        KeyError: unknown dataset name.
    """
    if name not in BUILTIN_DATASETS:
        raise KeyError(f"unknown dataset {name!r}; choose from {', '.join(sorted(BUILTIN_DATASETS))}")
    file_name, kind = BUILTIN_DATASETS[name]
    text = io.StringIO(_bundled(file_name))
    return load_edge_list(text) if kind == "edges" else load_electrical_lines(text)


def graph_stats(graph: Graph) -> dict[str, Any]:
    """Node and edge counts, 2m, weight range and the number of connected components."""
    if graph.n:
        components, _ = connected_components(graph.adjacency(), directed=False)
    else:
        components = 0
    has_edges = graph.edge_count > 0
    return {
        "n": graph.n,
        "edge_count": graph.edge_count,
        "total_weight_2m": graph.total_weight_2m,
        "min_weight": float(graph.w.min()) if has_edges else None,
        "max_weight": float(graph.w.max()) if has_edges else None,
        "mean_weight": float(graph.w.mean()) if has_edges else None,
        "components": int(components),
    }


def to_networkx(graph: Graph) -> nx.Graph:
    """Convert to ``networkx.Graph``; nodes are the dense indices, ``label`` holds the original id."""
    g = nx.Graph()
    g.add_nodes_from((i, {"label": label}) for i, label in enumerate(graph.labels))
    g.add_weighted_edges_from(graph.edges)
    return g


def from_networkx(g: nx.Graph, weight: str = "weight") -> Graph:
    """
    Convert a ``networkx.Graph``; nodes are indexed in iteration order and
    missing weights default to 1.0.
    """
    if g.is_directed() or g.is_multigraph():
        raise GraphFormatError("only simple undirected graphs can be converted")
    index = {node: i for i, node in enumerate(g.nodes)}
    edges = [(index[a], index[b], float(data.get(weight, 1.0))) for a, b, data in g.edges(data=True)]
    return build_graph(len(index), edges, labels=list(index))
