import pytest

from netmaxcorr.graph import (
    Graph,
    InvalidGraphError,
    InvalidPartitionError,
    Partition,
    cut_edges,
    internal_edges,
    read_edge_list,
    write_edge_list,
)


def test_path_split_internal_and_cut():
    g = Graph.path(3)
    p = Partition([[0, 1], [2]])
    assert set(internal_edges(g, p)) == {(0, 1)}
    assert set(cut_edges(g, p)) == {(1, 2)}


def test_single_block_keeps_every_edge():
    g = Graph.cycle(5)
    p = Partition([range(5)])
    assert set(internal_edges(g, p)) == set(g.edges)
    assert cut_edges(g, p) == []


def test_k4_two_pairs():
    g = Graph.complete(4)
    p = Partition([[0, 1], [2, 3]])
    assert set(internal_edges(g, p)) == {(0, 1), (2, 3)}
    assert len(cut_edges(g, p)) == 4


def test_edges_are_canonical_and_deduplicated():
    g = Graph(3, [(2, 1), (1, 2), (0, 2)])
    assert g.edges == ((0, 2), (1, 2))
    assert g.neighbors(2) == (0, 1)
    assert g.has_edge(2, 0) and not g.has_edge(0, 1)


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(-1, 0)]])
def test_invalid_edges_rejected(edges):
    with pytest.raises(InvalidGraphError):
        Graph(3, edges)


def test_constructors():
    assert len(Graph.complete(5).edges) == 10
    assert len(Graph.cycle(6).edges) == 6
    assert len(Graph.star(5).edges) == 4
    assert len(Graph.grid(5, 5).edges) == 40
    assert len(Graph.grid(8, 8).edges) == 112


def test_ball_on_grid():
    g = Graph.grid(3, 3)
    assert sorted(g.ball(4, 0)) == [4]
    assert sorted(g.ball(4, 1)) == [1, 3, 4, 5, 7]
    assert sorted(g.ball(0, 4)) == list(range(9))


def test_subgraph_relabels():
    g = Graph.cycle(5)
    sub, labels = g.subgraph([4, 0, 1])
    assert labels == [0, 1, 4]
    assert set(sub.edges) == {(0, 1), (0, 2)}


def test_partition_validation():
    Partition([[0, 1], [2]]).validate(3)
    with pytest.raises(InvalidPartitionError):
        Partition([[0, 1], [1, 2]]).validate(3)
    with pytest.raises(InvalidPartitionError):
        Partition([[0, 1]]).validate(3)
    with pytest.raises(InvalidPartitionError):
        Partition([[0, 1], [2, 3]]).validate(3)


def test_edge_list_round_trip(tmp_path):
    g = Graph.grid(2, 3)
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g


def test_edge_list_is_one_based_with_comments(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("# a triangle\n1 2\n2 3\n\n3 1\n")
    g = read_edge_list(path)
    assert g.n == 3 and g.edges == ((0, 1), (0, 2), (1, 2))
    path.write_text("1 x\n")
    with pytest.raises(InvalidGraphError):
        read_edge_list(path)
