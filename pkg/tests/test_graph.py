import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pccgraph.graph import Graph, build_knn_graph, connected_components, dump_adjacency, graph_diagnostics
from pccgraph.io_formats import FeatureMatrix


def brute_force_knn(values, k):
    """Independent reference: full pairwise table, ties by ascending index, union."""
    n = values.shape[0]
    adjacency = [set() for _ in range(n)]
    for i in range(n):
        dists = np.sum((values - values[i]) ** 2, axis=1)
        ranked = sorted((float(dists[j]), j) for j in range(n) if j != i)
        for _, j in ranked[:k]:
            adjacency[i].add(j)
            adjacency[j].add(i)
    return [sorted(s) for s in adjacency]


def matrix(values):
    values = np.asarray(values, dtype=np.float64)
    return FeatureMatrix([f"r{i}" for i in range(values.shape[0])], values)


def clique(nodes):
    members = sorted(nodes)
    return {i: [j for j in members if j != i] for i in members}


def graph_from_dict(adj):
    n = max(adj) + 1
    return Graph(n, [np.array(adj.get(i, []), dtype=np.int64) for i in range(n)])


class TestBuild:
    def test_line_of_points(self):
        g = build_knn_graph(matrix([[0.0], [1.0], [2.0], [3.0], [10.0]]), 1)
        expected = [[1], [0, 2], [1, 3], [2, 4], [3]]
        assert [a.tolist() for a in g.neighbors] == expected

    def test_smallest_graph(self):
        g = build_knn_graph(matrix([[0.0], [5.0]]), 1)
        assert [a.tolist() for a in g.neighbors] == [[1], [0]]

    def test_k_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="k must be"):
            build_knn_graph(matrix([[0.0], [1.0], [2.0]]), 3)
        with pytest.raises(ValueError, match="k must be"):
            build_knn_graph(matrix([[0.0], [1.0], [2.0]]), 0)

    def test_duplicate_points_tie_break_by_index(self):
        # four identical points, k=1: everyone picks node 0 except node 0 picks 1
        g = build_knn_graph(matrix(np.zeros((4, 2))), 1)
        assert [a.tolist() for a in g.neighbors] == [[1, 2, 3], [0], [0], [0]]

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(5, 60))
            d = int(rng.integers(1, 6))
            k = int(rng.integers(1, min(8, n - 1) + 1))
            values = rng.normal(size=(n, d))
            g = build_knn_graph(matrix(values), k)
            assert [a.tolist() for a in g.neighbors] == brute_force_knn(values, k)

    @given(seed=st.integers(0, 2**31), n=st.integers(2, 40), k=st.integers(1, 8), d=st.integers(1, 5))
    def test_symmetric_loop_free_min_degree(self, seed, n, k, d):
        k = min(k, n - 1)
        rng = np.random.default_rng(seed)
        g = build_knn_graph(matrix(rng.normal(size=(n, d))), k)
        for i, adj in enumerate(g.neighbors):
            assert i not in adj
            assert len(set(adj.tolist())) == adj.size
            for j in adj:
                assert i in g.neighbors[j]
        assert int(g.degrees.min()) >= 1

    @given(seed=st.integers(0, 2**31), n=st.integers(3, 30), k=st.integers(1, 5))
    def test_row_permutation_equivariance(self, seed, n, k):
        k = min(k, n - 1)
        rng = np.random.default_rng(seed)
        values = rng.normal(size=(n, 3))
        perm = rng.permutation(n)
        base = build_knn_graph(matrix(values), k)
        permuted = build_knn_graph(matrix(values[perm]), k)
        # relabel: node perm[i] of the base graph is node i of the permuted one
        inverse = np.empty(n, dtype=np.int64)
        inverse[perm] = np.arange(n)
        relabeled = [sorted(inverse[base.neighbors[perm[i]]].tolist()) for i in range(n)]
        assert [a.tolist() for a in permuted.neighbors] == relabeled


class TestGraphType:
    def test_asymmetric_adjacency_rejected(self):
        with pytest.raises(ValueError, match="asymmetric"):
            Graph(2, [np.array([1]), np.array([], dtype=np.int64)])

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph(1, [np.array([0])])

    def test_csr_matches_neighbors(self):
        g = graph_from_dict({**clique({0, 1, 2}), **clique({3, 4, 5})})
        indptr, indices = g.csr()
        for i in range(g.n):
            assert indices[indptr[i] : indptr[i + 1]].tolist() == g.neighbors[i].tolist()


class TestDiagnostics:
    def test_two_cliques(self):
        g = graph_from_dict({**clique({0, 1, 2}), **clique({3, 4, 5})})
        diag = graph_diagnostics(g)
        assert diag.component_count == 2
        assert diag.component_sizes == [3, 3]

    def test_path_graph(self):
        g = graph_from_dict({0: [1], 1: [0, 2], 2: [1, 3], 3: [2, 4], 4: [3]})
        diag = graph_diagnostics(g)
        assert diag.component_count == 1
        assert (diag.degree_min, diag.degree_max) == (1, 2)
        assert g.degrees.tolist() == [1, 2, 2, 2, 1]

    def test_component_labels(self):
        g = graph_from_dict({**clique({0, 1}), **clique({2, 3, 4})})
        assert connected_components(g).tolist() == [0, 0, 1, 1, 1]


def test_adjacency_dump_format():
    g = graph_from_dict({0: [1], 1: [0, 2], 2: [1]})
    buf = io.StringIO()
    dump_adjacency(g, buf, ids=["a", "b", "c"])
    assert buf.getvalue() == "a: b\nb: a c\nc: b\n"
