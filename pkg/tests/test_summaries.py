import itertools

import numpy as np
import pytest

from netselect.graphs import Graph, ModelParams, generate
from netselect.summaries import (
    DATASET_HEADER,
    SummaryVector,
    avg_clustering,
    degree_quartiles,
    local_clustering,
    read_dataset_csv,
    summarize,
    summarize_many,
    triangle_count,
    write_dataset_csv,
)


def complete_graph(n):
    return Graph(n, itertools.combinations(range(n), 2))


def random_graph(rng, n, density=0.35):
    edges = [
        (u, v)
        for u, v in itertools.combinations(range(n), 2)
        if rng.random() < density
    ]
    return Graph(n, edges)


def brute_triangles(g):
    return sum(
        1
        for a, b, c in itertools.combinations(range(g.n_nodes), 3)
        if g.has_edge(a, b) and g.has_edge(a, c) and g.has_edge(b, c)
    )


def brute_local_clustering(g, v):
    nbrs = sorted(g.neighbors(v))
    d = len(nbrs)
    if d < 2:
        return 0.0
    links = sum(1 for a, b in itertools.combinations(nbrs, 2) if g.has_edge(a, b))
    return 2.0 * links / (d * (d - 1))


class TestTriangleCount:
    def test_triangle(self):
        assert triangle_count(complete_graph(3)) == 1

    def test_k4(self):
        assert triangle_count(complete_graph(4)) == 4

    def test_empty(self):
        assert triangle_count(Graph(5)) == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(3, 13))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.8)))
            assert triangle_count(g) == brute_triangles(g)

    def test_adding_edge_never_decreases(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(4, 10))
            g = random_graph(rng, n, 0.3)
            missing = [
                (u, v)
                for u, v in itertools.combinations(range(n), 2)
                if not g.has_edge(u, v)
            ]
            if not missing:
                continue
            u, v = missing[int(rng.integers(len(missing)))]
            g2 = Graph(n, list(g.edges) + [(u, v)])
            assert triangle_count(g2) >= triangle_count(g)


class TestLocalClustering:
    def test_star_center_is_zero(self):
        g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        assert local_clustering(g, 0) == 0.0

    def test_triangle_node_is_one(self):
        g = complete_graph(3)
        for v in range(3):
            assert local_clustering(g, v) == 1.0

    def test_degree_below_two_is_zero(self):
        g = Graph(3, [(0, 1)])
        assert local_clustering(g, 0) == 0.0
        assert local_clustering(g, 2) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            local_clustering(Graph(3), 3)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = int(rng.integers(3, 13))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.8)))
            for v in range(n):
                assert local_clustering(g, v) == pytest.approx(
                    brute_local_clustering(g, v), abs=1e-15
                )


class TestAvgClustering:
    def test_triangle(self):
        assert avg_clustering(complete_graph(3)) == 1.0

    def test_empty(self):
        assert avg_clustering(Graph(4)) == 0.0

    def test_path_all_zero(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert avg_clustering(g) == 0.0

    def test_is_mean_of_locals(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            n = int(rng.integers(3, 13))
            g = random_graph(rng, n)
            mean = sum(local_clustering(g, v) for v in range(n)) / n
            assert avg_clustering(g) == pytest.approx(mean, abs=1e-14)


class TestDegreeQuartiles:
    def test_regular_graph(self):
        g = Graph(5, [(i, (i + 1) % 5) for i in range(5)])  # 2-regular ring
        assert degree_quartiles(g) == (2.0, 2.0, 2.0)

    def test_interpolated_median(self):
        # values {1, 2, 3, 4}: position h = 1.5 interpolates 2 and 3
        from netselect.summaries import _linear_quantile

        vals = np.array([1.0, 2.0, 3.0, 4.0])
        assert _linear_quantile(vals, 0.5) == 2.5
        assert _linear_quantile(vals, 0.25) == 1.75
        assert _linear_quantile(vals, 0.75) == 3.25

    def test_path_quartiles(self):
        # path on 3 nodes: degrees {1, 1, 2}
        g = Graph(3, [(0, 1), (1, 2)])
        assert degree_quartiles(g) == (1.0, 1.0, 1.5)

    def test_matches_numpy_quantile(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            n = int(rng.integers(2, 14))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.9)))
            expected = np.quantile(g.degrees(), [0.25, 0.5, 0.75])
            got = degree_quartiles(g)
            assert got == pytest.approx(tuple(expected), abs=1e-12)

    def test_ordering_invariant(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            n = int(rng.integers(2, 14))
            g = random_graph(rng, n)
            q25, q50, q75 = degree_quartiles(g)
            assert q25 <= q50 <= q75 <= n - 1


class TestSummarize:
    def test_triangle_graph(self):
        sv = summarize(complete_graph(3))
        assert sv == SummaryVector(1, 1.0, 2.0, 2.0, 2.0)

    def test_empty_graph(self):
        sv = summarize(Graph(4))
        assert sv == SummaryVector(0, 0.0, 0.0, 0.0, 0.0)

    def test_composition_of_parts(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            n = int(rng.integers(3, 13))
            g = random_graph(rng, n)
            sv = summarize(g)
            assert sv.triangles == brute_triangles(g)
            assert sv.avg_clustering == pytest.approx(
                sum(brute_local_clustering(g, v) for v in range(n)) / n, abs=1e-14
            )
            assert (sv.deg_q25, sv.deg_q50, sv.deg_q75) == degree_quartiles(g)

    def test_to_array_order(self):
        sv = SummaryVector(3, 0.5, 1.0, 2.0, 4.0)
        assert sv.to_array().tolist() == [3.0, 0.5, 1.0, 2.0, 4.0]

    def test_isomorphism_invariance(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            n = int(rng.integers(4, 12))
            g = random_graph(rng, n)
            perm = rng.permutation(n)
            g2 = Graph(n, [(perm[u], perm[v]) for u, v in g.edges])
            a, b = summarize(g), summarize(g2)
            assert a.triangles == b.triangles
            # clustering sums run in node order, so allow rounding slack
            assert a.avg_clustering == pytest.approx(b.avg_clustering, abs=1e-14)
            assert (a.deg_q25, a.deg_q50, a.deg_q75) == (
                b.deg_q25,
                b.deg_q50,
                b.deg_q75,
            )

    def test_neighbor_edge_sum_is_three_triangles(self):
        # sum over nodes of edges-among-neighbors equals 3x triangle count
        rng = np.random.default_rng(37)
        for _ in range(30):
            n = int(rng.integers(3, 12))
            g = random_graph(rng, n)
            total = 0
            for v in range(n):
                nbrs = sorted(g.neighbors(v))
                total += sum(
                    1
                    for a, b in itertools.combinations(nbrs, 2)
                    if g.has_edge(a, b)
                )
            assert total == 3 * triangle_count(g)

    def test_summarize_many_matches_single(self):
        params = ModelParams(30, 80, 0.3, 0.1, 0.05)
        graphs = [generate(params, s) for s in range(10)]
        X = summarize_many(graphs)
        for i, g in enumerate(graphs):
            assert X[i].tolist() == summarize(g).to_array().tolist()


class TestDatasetCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(41)
        params = ModelParams(30, 80, 0.3, 0.1, 0.05)
        X = summarize_many([generate(params, s) for s in range(8)])
        y = np.array([0, 1] * 4)
        path = tmp_path / "d.csv"
        write_dataset_csv(path, X, y)
        X2, y2 = read_dataset_csv(path)
        assert np.array_equal(X, X2)
        assert np.array_equal(y, y2)

    def test_header(self, tmp_path):
        path = tmp_path / "d.csv"
        write_dataset_csv(path, np.zeros((1, 5)), np.array([0]))
        assert path.read_text().splitlines()[0] == DATASET_HEADER
        assert DATASET_HEADER == (
            "model_index,triangles,avg_clustering,deg_q25,deg_q50,deg_q75"
        )

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_dataset_csv(path)

    def test_rejects_bad_shape(self, tmp_path):
        with pytest.raises(ValueError):
            write_dataset_csv(tmp_path / "d.csv", np.zeros((2, 3)), np.array([0, 1]))
