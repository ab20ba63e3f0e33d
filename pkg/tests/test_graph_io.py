"""Tests for qubo_annealer/graph_io.py.

Coverage:
  * edge-list parsing: weights, comments, duplicate merging, line-numbered errors;
  * edge-list round trips: node-count and label headers;
  * electrical CSV parsing: admittance weights, bus labels, parallel lines;
  * bundled datasets and their published sizes;
  * graph statistics and networkx conversion.
"""

import io
import math

import networkx as nx
import numpy as np
import pytest

from qubo_annealer.errors import GraphFormatError
from qubo_annealer.graph_io import (
    BUILTIN_DATASETS,
    ElectricalLine,
    build_graph,
    from_networkx,
    graph_stats,
    load_builtin,
    load_edge_list,
    load_electrical_lines,
    to_networkx,
    write_edge_list,
)


# ─────────────────────────── edge lists ───────────────────────────


def test_unweighted_path_degrees():
    graph = load_edge_list(io.StringIO("0 1\n1 2\n"))
    assert graph.n == 3
    assert graph.weighted_degrees.tolist() == [1.0, 2.0, 1.0]
    assert graph.total_weight_2m == 4.0


def test_comments_blank_lines_and_weights():
    graph = load_edge_list(io.StringIO("# header\n\n0 1 2.5\n   \n1 2 0.5\n"))
    assert graph.edges == [(0, 1, 2.5), (1, 2, 0.5)]


def test_duplicate_edges_are_summed():
    graph = load_edge_list(io.StringIO("0 1 1\n1 0 2\n"))
    assert graph.edge_count == 1
    assert graph.edges == [(0, 1, 3.0)]


def test_isolated_high_id_extends_node_count():
    graph = load_edge_list(io.StringIO("0 4\n"))
    assert graph.n == 5
    assert graph.weighted_degrees.tolist() == [1.0, 0.0, 0.0, 0.0, 1.0]


def test_load_from_path(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("0 1 3\n", encoding="utf-8")
    assert load_edge_list(path).edges == [(0, 1, 3.0)]
    assert load_edge_list(str(path)).n == 2


@pytest.mark.parametrize(
    "text, line",
    [
        ("0 1\n1 2 3 4\n", 2),
        ("0 x\n", 1),
        ("# c\n1 1\n", 2),
        ("0 1 -2\n", 1),
        ("0 1 0\n", 1),
        ("0 1 nan\n", 1),
        ("-1 2\n", 1),
    ],
)
def test_malformed_edge_list_reports_line(text, line):
    with pytest.raises(GraphFormatError) as info:
        load_edge_list(io.StringIO(text))
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_write_then_load_preserves_weights(triangle_graph):
    buffer = io.StringIO()
    write_edge_list(triangle_graph, buffer)
    buffer.seek(0)
    assert buffer.getvalue().startswith("#")
    assert load_edge_list(buffer).edges == triangle_graph.edges


def _reload(graph):
    buffer = io.StringIO()
    write_edge_list(graph, buffer)
    buffer.seek(0)
    return load_edge_list(buffer)


def _assert_same_graph(left, right):
    assert left.n == right.n
    assert left.labels == right.labels
    assert left.edges == right.edges
    np.testing.assert_array_equal(left.weighted_degrees, right.weighted_degrees)
    assert left.total_weight_2m == right.total_weight_2m


def test_round_trip_keeps_isolated_top_node():
    graph = build_graph(3, [(0, 1, 1.0)])
    reloaded = _reload(graph)
    assert reloaded.n == 3
    _assert_same_graph(graph, reloaded)


def test_round_trip_keeps_bus_labels(ieee33):
    reloaded = _reload(ieee33)
    assert reloaded.labels[:3] == ("1", "2", "3")
    _assert_same_graph(ieee33, reloaded)


def test_round_trip_is_idempotent(karate):
    once = _reload(karate)
    _assert_same_graph(karate, once)
    _assert_same_graph(once, _reload(once))


@pytest.mark.parametrize(
    "text, line",
    [
        ("# nodes: two\n0 1\n", 1),
        ("# nodes: -1\n", 1),
        ("0 1\n# labels: {\n", 2),
        ("# labels: 7\n0 1\n", 1),
    ],
)
def test_malformed_headers(text, line):
    with pytest.raises(GraphFormatError) as info:
        load_edge_list(io.StringIO(text))
    assert info.value.line == line


def test_header_mismatches():
    with pytest.raises(GraphFormatError, match="declared node count"):
        load_edge_list(io.StringIO("# nodes: 2\n0 2\n"))
    with pytest.raises(GraphFormatError, match="labels declared"):
        load_edge_list(io.StringIO('# labels: ["a"]\n0 1\n'))


def test_build_graph_validation():
    with pytest.raises(GraphFormatError):
        build_graph(2, [(0, 0, 1.0)])
    with pytest.raises(GraphFormatError):
        build_graph(2, [(0, 2, 1.0)])
    with pytest.raises(GraphFormatError):
        build_graph(2, [(0, 1, 1.0)], labels=["a"])


def test_adjacency_is_symmetric(triangle_graph):
    a = triangle_graph.adjacency().toarray()
    np.testing.assert_array_equal(a, a.T)
    assert a[0, 2] == 3.0
    np.testing.assert_array_equal(a.sum(axis=1), triangle_graph.weighted_degrees)


# ─────────────────────────── electrical tables ───────────────────────────


def test_electrical_weight_is_admittance_magnitude():
    graph = load_electrical_lines(io.StringIO("from_bus,to_bus,r_ohm,x_ohm\n1,2,3,4\n"))
    assert graph.edges == [(0, 1, pytest.approx(0.2))]
    assert graph.labels == ("1", "2")


def test_electrical_pure_reactance_is_allowed():
    graph = load_electrical_lines(io.StringIO("from_bus,to_bus,r_ohm,x_ohm\n1,2,0,0.5\n"))
    assert graph.w[0] == pytest.approx(2.0)


def test_electrical_labels_follow_first_appearance():
    text = "from_bus,to_bus,r_ohm,x_ohm\n10,3,1,0\n3,7,1,0\n"
    graph = load_electrical_lines(io.StringIO(text))
    assert graph.labels == ("10", "3", "7")
    assert graph.index_of("7") == 2
    with pytest.raises(KeyError):
        graph.index_of("99")


def test_parallel_lines_keep_the_first():
    text = "from_bus,to_bus,r_ohm,x_ohm\n1,2,1,0\n2,1,0.5,0\n"
    graph = load_electrical_lines(io.StringIO(text))
    assert graph.edge_count == 1
    assert graph.w[0] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "rows, line",
    [
        ("1,2,0,0\n", 2),
        ("1,2,-1,1\n", 2),
        ("1,2,1,1\n3,3,1,1\n", 3),
        ("1,2,abc,1\n", 2),
    ],
)
def test_malformed_electrical_rows(rows, line):
    with pytest.raises(GraphFormatError) as info:
        load_electrical_lines(io.StringIO("from_bus,to_bus,r_ohm,x_ohm\n" + rows))
    assert info.value.line == line


def test_electrical_line_weight_and_validation():
    assert ElectricalLine("1", "2", 3.0, 4.0).weight == pytest.approx(0.2)
    for args in [("1", "1", 1.0, 1.0), ("1", "2", 0.0, 0.0), ("1", "2", math.inf, 1.0)]:
        with pytest.raises(GraphFormatError) as info:
            ElectricalLine(*args)
        assert info.value.line is None


def test_electrical_missing_column():
    with pytest.raises(GraphFormatError):
        load_electrical_lines(io.StringIO("from_bus,to_bus,r_ohm\n1,2,3\n"))


# ─────────────────────────── bundled datasets ───────────────────────────


def test_karate_dataset(karate):
    assert karate.n == 34
    assert karate.edge_count == 78
    assert karate.total_weight_2m == 460.0
    assert graph_stats(karate)["components"] == 1


def test_ieee33_dataset(ieee33):
    assert ieee33.n == 33
    assert ieee33.edge_count == 32
    assert ieee33.labels[0] == "1"
    assert graph_stats(ieee33)["components"] == 1


def test_ieee118_dataset():
    graph = load_builtin("ieee118")
    assert graph.n == 118
    assert graph.edge_count == 179
    assert graph_stats(graph)["components"] == 1


def test_load_builtin_names():
    assert set(BUILTIN_DATASETS) == {"karate", "ieee33", "ieee118"}
    with pytest.raises(KeyError):
        load_builtin("ieee9000")


# ─────────────────────────── stats and conversion ───────────────────────────


def test_graph_stats(triangle_graph):
    stats = graph_stats(triangle_graph)
    assert stats == {
        "n": 3,
        "edge_count": 3,
        "total_weight_2m": 12.0,
        "min_weight": 1.0,
        "max_weight": 3.0,
        "mean_weight": 2.0,
        "components": 1,
    }


def test_graph_stats_counts_components():
    graph = build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert graph_stats(graph)["components"] == 2


def test_networkx_round_trip(karate):
    g = to_networkx(karate)
    assert g.number_of_edges() == 78
    assert g.size(weight="weight") == pytest.approx(230.0)
    back = from_networkx(g)
    assert back.edges == karate.edges


def test_from_networkx_rejects_directed():
    with pytest.raises(GraphFormatError):
        from_networkx(nx.DiGraph([(0, 1)]))


def test_from_networkx_default_weight():
    graph = from_networkx(nx.Graph([("a", "b")]))
    assert graph.labels == ("a", "b")
    assert math.isclose(graph.w[0], 1.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
