import itertools

import numpy as np
import pytest

from netselect.graphs import (
    Graph,
    InvalidParamsError,
    IterationCapExceededError,
    ModelParams,
    NonTerminatingError,
    count_closeable_triangles,
    edge_probability,
    generate,
    generate_batch,
    generate_with_trace,
    read_edge_list,
    write_edge_list,
)
from netselect.rng import derive_seed


def random_graph(rng, n, density=0.3):
    edges = [
        (u, v)
        for u, v in itertools.combinations(range(n), 2)
        if rng.random() < density
    ]
    return Graph(n, edges)


class TestModelParams:
    def test_valid(self):
        p = ModelParams(100, 500, 0.3, 0.1, 0.05)
        assert p.n_nodes == 100 and p.n_edges == 500

    def test_too_many_edges(self):
        with pytest.raises(InvalidParamsError):
            ModelParams(4, 7, 0.3)

    def test_too_few_nodes(self):
        with pytest.raises(InvalidParamsError):
            ModelParams(1, 0, 0.3)

    def test_bad_probabilities(self):
        with pytest.raises(InvalidParamsError):
            ModelParams(4, 2, 1.5)
        with pytest.raises(InvalidParamsError):
            ModelParams(4, 2, 0.3, -0.1)
        with pytest.raises(InvalidParamsError):
            ModelParams(4, 2, 0.3, 0.1, -0.2)

    def test_submodel_zeroes_p2(self):
        p = ModelParams(10, 5, 0.3, 0.1, 0.05)
        assert p.without_extra_closure().p2 == 0.0
        assert p.without_extra_closure().p1 == p.p1


class TestEdgeProbability:
    def test_no_triangles_is_base(self):
        p = ModelParams(100, 500, 0.3, 0.1, 0.05)
        assert edge_probability(p, 0) == 0.3

    def test_single_triangle_adds_p1(self):
        p = ModelParams(100, 500, 0.3, 0.1, 0.05)
        assert edge_probability(p, 1) == pytest.approx(0.4)

    def test_extra_triangles_add_p2_each(self):
        p = ModelParams(100, 500, 0.3, 0.1, 0.05)
        assert edge_probability(p, 3) == pytest.approx(0.5)

    def test_capped_at_one(self):
        p = ModelParams(100, 500, 0.9, 0.1, 0.2)
        assert edge_probability(p, 4) == 1.0

    def test_monotone_in_triangles(self):
        p = ModelParams(100, 500, 0.2, 0.15, 0.07)
        probs = [edge_probability(p, t) for t in range(60)]
        assert all(a <= b for a, b in zip(probs, probs[1:]))

    def test_negative_count_rejected(self):
        p = ModelParams(100, 500, 0.3)
        with pytest.raises(ValueError):
            edge_probability(p, -1)


class TestCountCloseableTriangles:
    def test_path_endpoints_share_center(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert count_closeable_triangles(g, 0, 2) == 1

    def test_empty_graph(self):
        g = Graph(5)
        for u, v in itertools.combinations(range(5), 2):
            assert count_closeable_triangles(g, u, v) == 0

    def test_same_node_rejected(self):
        g = Graph(3, [(0, 1)])
        with pytest.raises(ValueError):
            count_closeable_triangles(g, 1, 1)

    def test_existing_edge_rejected(self):
        g = Graph(3, [(0, 1)])
        with pytest.raises(ValueError):
            count_closeable_triangles(g, 0, 1)

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = int(rng.integers(4, 13))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.7)))
            for u, v in itertools.combinations(range(n), 2):
                if g.has_edge(u, v):
                    continue
                expected = sum(
                    1 for w in range(n) if g.has_edge(u, w) and g.has_edge(v, w)
                )
                assert count_closeable_triangles(g, u, v) == expected


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 3)])

    def test_adjacency_consistent_with_edges(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 10)
        for u in range(10):
            for v in range(10):
                assert (v in g.neighbors(u)) == (
                    (min(u, v), max(u, v)) in g.edges if u != v else False
                )

    def test_edge_array_sorted(self):
        g = Graph(5, [(3, 4), (0, 2), (0, 1)])
        assert g.edge_array().tolist() == [[0, 1], [0, 2], [3, 4]]

    def test_degrees(self):
        g = Graph(4, [(0, 1), (0, 2), (0, 3)])
        assert g.degrees().tolist() == [3, 1, 1, 1]


class TestGenerate:
    def test_forced_single_edge(self):
        g = generate(ModelParams(2, 1, 1.0), 5)
        assert g.edges == {(0, 1)}

    def test_exact_edge_count_at_scale(self):
        g = generate(ModelParams(100, 500, 0.3, 0.1, 0.05), 123)
        assert g.n_nodes == 100
        assert g.n_edges == 500

    def test_deterministic(self):
        params = ModelParams(50, 200, 0.3, 0.1, 0.05)
        assert generate(params, 99) == generate(params, 99)

    def test_different_seeds_differ(self):
        params = ModelParams(50, 200, 0.3, 0.1, 0.05)
        assert generate(params, 1) != generate(params, 2)

    def test_p0_zero_never_terminates(self):
        with pytest.raises(NonTerminatingError):
            generate(ModelParams(10, 5, 0.0, 0.5, 0.5), 1)

    def test_iteration_cap(self):
        with pytest.raises(IterationCapExceededError):
            generate(ModelParams(100, 500, 0.001), 1, proposal_cap=100)

    def test_trace_matches_recomputation(self):
        # every accepted proposal's recorded triangle count and probability
        # must match a recomputation on the pre-acceptance graph
        params = ModelParams(30, 120, 0.3, 0.1, 0.05)
        final, trace = generate_with_trace(params, 17)
        assert len(trace) == 120
        g = Graph(30)
        edges_so_far = []
        for prop in trace:
            u, v = prop.pair
            assert prop.closeable_triangles == count_closeable_triangles(g, u, v)
            assert prop.acceptance_probability == edge_probability(
                params, prop.closeable_triangles
            )
            edges_so_far.append((u, v))
            g = Graph(30, edges_so_far)
        assert g == final

    def test_trace_graph_equals_plain_generate(self):
        params = ModelParams(20, 40, 0.25, 0.1, 0.02)
        g, _ = generate_with_trace(params, 4242)
        assert g == generate(params, 4242)


class TestGenerateBatch:
    def test_singleton_matches_derived_seed(self):
        params = ModelParams(20, 30, 0.4, 0.1, 0.0)
        batch = generate_batch(params, 11, 1)
        assert batch == [generate(params, derive_seed(11, 0))]

    def test_rerun_identical(self):
        params = ModelParams(20, 30, 0.4)
        assert generate_batch(params, 5, 3) == generate_batch(params, 5, 3)

    def test_every_sample_reproducible_in_isolation(self):
        params = ModelParams(20, 30, 0.4, 0.1, 0.05)
        batch = generate_batch(params, 8, 5)
        for i, g in enumerate(batch):
            assert g == generate(params, derive_seed(8, i))

    def test_exact_edge_counts(self):
        params = ModelParams(100, 500, 0.3, 0.1, 0.05)
        for g in generate_batch(params, 2, 100):
            assert g.n_edges == 500

    def test_bad_count(self):
        with pytest.raises(ValueError):
            generate_batch(ModelParams(4, 2, 0.3), 0, 0)

    def test_error_tagged_with_sample_index(self):
        with pytest.raises(IterationCapExceededError, match="sample 0"):
            generate_batch(ModelParams(100, 500, 0.001), 1, 2, proposal_cap=10)


class TestEdgeListRoundTrip:
    def test_round_trip_bit_exact(self, tmp_path):
        params = ModelParams(40, 100, 0.3, 0.1, 0.05)
        g = generate(params, 77)
        path = tmp_path / "net.txt"
        write_edge_list(g, path)
        g2 = read_edge_list(path)
        assert g2 == g
        path2 = tmp_path / "net2.txt"
        write_edge_list(g2, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_format(self, tmp_path):
        g = Graph(4, [(2, 3), (0, 1)])
        path = tmp_path / "g.txt"
        write_edge_list(g, path)
        assert path.read_text() == "4 2\n0 1\n2 3\n"

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4\n0 1\n")
        with pytest.raises(ValueError):
            read_edge_list(path)

    def test_wrong_edge_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4 3\n0 1\n")
        with pytest.raises(ValueError):
            read_edge_list(path)

    def test_duplicate_edge_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4 2\n0 1\n1 0\n")
        with pytest.raises(ValueError):
            read_edge_list(path)


class TestProposalSemantics:
    def test_acceptance_probability_values_seen(self):
        # at m=120 on 30 nodes some proposals must close triangles, so both
        # the base and boosted probabilities appear in the trace
        params = ModelParams(30, 120, 0.3, 0.1, 0.05)
        _, trace = generate_with_trace(params, 3)
        probs = {round(p.acceptance_probability, 10) for p in trace}
        assert 0.3 in probs
        assert any(p > 0.3 for p in probs)

    def test_er_limit_uniform_pairs(self):
        # p1 = p2 = 0: acceptance is constant, so each 2-edge graph on 4
        # nodes should appear with roughly equal frequency
        params = ModelParams(4, 2, 0.3)
        counts = {}
        n_rep = 1500
        for i in range(n_rep):
            g = generate(params, derive_seed(123, i))
            key = tuple(map(tuple, g.edge_array().tolist()))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 15
        expected = n_rep / 15
        assert all(0.5 * expected < c < 1.7 * expected for c in counts.values())
