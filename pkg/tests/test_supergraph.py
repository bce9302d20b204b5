import numpy as np
import pytest

from supergraph import (
    MissingCoordinatesError,
    Supergraph,
    assign_probabilities,
    build_correlations,
    geometric_from_coordinates,
    generate_connected_geometric,
    generate_geometric,
    independent_model,
    load_graph,
    load_model,
    spatial_model,
    save_correlations,
    save_graph,
    validate_model,
)
from supergraph.link_model import LinkStatModel


class TestSupergraph:
    def test_rejects_unsorted_edges(self):
        with pytest.raises(ValueError):
            Supergraph(3, ((1, 2), (0, 1)))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Supergraph(3, ((1, 1),))

    def test_from_edges_canonicalizes(self):
        graph = Supergraph.from_edges(4, [(3, 2), (1, 0), (2, 0), (0, 1)])
        assert graph.edges == ((0, 1), (0, 2), (2, 3))

    def test_incidence_columns(self, path3):
        b = path3.incidence
        np.testing.assert_array_equal(b[:, 0], [1, -1, 0])
        np.testing.assert_array_equal(b[:, 1], [0, 1, -1])

    def test_degrees_and_neighborhoods(self, star5):
        np.testing.assert_array_equal(star5.degrees, [4, 1, 1, 1, 1])
        assert star5.neighborhoods[0] == [0, 1, 2, 3]
        assert star5.neighborhoods[3] == [2]

    def test_adjacent_pairs(self, path3, star5):
        np.testing.assert_array_equal(path3.adjacent_edge_pairs, [[0, 1]])
        assert len(star5.adjacent_edge_pairs) == 6

    def test_connectivity(self, path3):
        assert path3.is_connected()
        assert not Supergraph(4, ((0, 1), (2, 3))).is_connected()


class TestGeometricGeneration:
    def test_two_nodes_large_radius(self):
        result = generate_geometric(2, 1.5, np.random.default_rng(0))
        assert result.graph.edges == ((0, 1),)
        assert result.connected

    def test_injected_coordinates(self):
        coords = np.array([[0.0, 0.0], [0.0, 0.1], [1.0, 0.0], [1.0, 0.1]])
        result = geometric_from_coordinates(coords, 0.2)
        assert result.graph.edges == ((0, 1), (2, 3))
        assert not result.connected

    def test_target_edge_count(self):
        result = generate_connected_geometric(30, 70, np.random.default_rng(3))
        assert result.graph.n_edges == 70
        assert result.connected
        assert result.graph.is_connected()
        lengths = result.graph.edge_lengths()
        assert np.all(lengths < result.radius)

    def test_same_seed_same_graph(self):
        first = generate_connected_geometric(20, 40, np.random.default_rng(11))
        second = generate_connected_geometric(20, 40, np.random.default_rng(11))
        assert first.graph.edges == second.graph.edges
        assert first.radius == second.radius

    def test_impossible_target(self):
        with pytest.raises(ValueError):
            generate_connected_geometric(5, 3, np.random.default_rng(0))


class TestLinkProbabilities:
    def _pair(self, distance):
        coords = np.array([[0.0, 0.0], [distance, 0.0]])
        return Supergraph(2, ((0, 1),), coords)

    def test_coincident_nodes(self):
        assert assign_probabilities(self._pair(0.0), 0.6, 0.2)[0] == pytest.approx(1.0)

    def test_at_radius(self):
        assert assign_probabilities(self._pair(0.2), 0.6, 0.2)[0] == pytest.approx(0.4)

    def test_at_half_radius(self):
        assert assign_probabilities(self._pair(0.1), 0.6, 0.2)[0] == pytest.approx(0.85)

    def test_missing_coordinates(self, path3):
        with pytest.raises(MissingCoordinatesError):
            assign_probabilities(path3, 0.6, 0.5)

    def test_relabeling_invariance(self, small_generated):
        graph, radius = small_generated.graph, small_generated.radius
        probs = assign_probabilities(graph, 0.6, radius)

        perm = np.random.default_rng(5).permutation(graph.n_nodes)
        relabeled = Supergraph.from_edges(graph.n_nodes, [(perm[i], perm[j]) for i, j in graph.edges],
                                          coordinates=graph.coordinates[np.argsort(perm)])
        relabeled_probs = assign_probabilities(relabeled, 0.6, radius)
        index = relabeled.edge_index()
        for e, (i, j) in enumerate(graph.edges):
            f = index[(min(perm[i], perm[j]), max(perm[i], perm[j]))]
            assert relabeled_probs[f] == pytest.approx(probs[e], abs=1e-14)


class TestCorrelations:
    def test_zero_constant_is_independent(self, path3):
        model = build_correlations(path3, np.array([0.5, 0.8]), 0.0)
        assert model.is_independent

    def test_adjacent_pair_value(self, path3):
        model = build_correlations(path3, np.array([0.5, 0.8]), 0.2)
        assert model.cross_cov[0, 1] == pytest.approx(0.02)
        assert model.cross_cov[1, 0] == pytest.approx(0.02)
        np.testing.assert_allclose(np.diag(model.cross_cov), [0.25, 0.16])

    def test_only_adjacent_pairs_correlated(self, small_model):
        gamma = small_model.cross_cov
        off = gamma - np.diag(np.diag(gamma))
        n_pairs = len(small_model.graph.adjacent_edge_pairs)
        assert np.count_nonzero(off) == 2 * n_pairs

        adjacent = np.zeros_like(off, dtype=bool)
        pairs = small_model.graph.adjacent_edge_pairs
        adjacent[pairs[:, 0], pairs[:, 1]] = adjacent[pairs[:, 1], pairs[:, 0]] = True
        assert not np.any(off[~adjacent])

    def test_no_decay_is_deterministic(self, small_generated):
        model = spatial_model(small_generated.graph, small_generated.radius, c1=0.0, c2=0.2)
        np.testing.assert_array_equal(model.probs, 1.0)
        np.testing.assert_array_equal(np.diag(model.cross_cov), 0.0)
        assert model.is_deterministic


class TestValidateModel:
    def test_diagonal_model(self, path3):
        report = validate_model(independent_model(path3, [0.3, 0.7]), probe_samples=0)
        assert report.psd
        assert report.cauchy_schwarz_violations == []
        assert report.ok

    def test_cauchy_schwarz_violation(self, path3):
        gamma = np.array([[0.25, 0.3], [0.3, 0.25]])
        report = validate_model(LinkStatModel(path3, [0.5, 0.5], gamma), probe_samples=0)
        assert report.cauchy_schwarz_violations == [(0, 1)]
        assert not report.ok

    def test_small_spatial_model_passes(self, small_model):
        report = validate_model(small_model, probe_samples=2000, rng=np.random.default_rng(0))
        assert report.psd
        assert report.ok
        assert report.clamp_rate is not None and report.clamp_rate <= 0.01

    @pytest.mark.slow
    def test_full_scale_model_passes(self):
        generated = generate_connected_geometric(120, 449, np.random.default_rng(0))
        report = validate_model(spatial_model(generated.graph, generated.radius), probe_samples=10_000,
                                rng=np.random.default_rng(1))
        assert report.psd
        assert report.clamp_rate <= 0.01


class TestGraphFiles:
    def test_round_trip_preserves_indices(self, small_model, tmp_path):
        graph_path = tmp_path / "graph.txt"
        correlation_path = tmp_path / "correlations.txt"
        save_graph(small_model.graph, small_model.probs, str(graph_path))
        save_correlations(small_model, str(correlation_path))

        graph, probs = load_graph(str(graph_path))
        assert graph.edges == small_model.graph.edges
        np.testing.assert_array_equal(probs, small_model.probs)

        model = load_model(str(graph_path), str(correlation_path))
        np.testing.assert_array_equal(model.cross_cov, small_model.cross_cov)

    def test_header_format(self, path3, tmp_path):
        path = tmp_path / "graph.txt"
        save_graph(path3, np.array([0.5, 1.0]), str(path))
        assert path.read_text().splitlines() == ["3 2", "1 2 0.5", "2 3 1"]

    def test_edge_count_mismatch(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("3 2\n1 2 0.5\n")
        with pytest.raises(ValueError):
            load_graph(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_graph(str(tmp_path / "absent.txt"))

    def test_without_correlations_is_independent(self, path3, tmp_path):
        path = tmp_path / "graph.txt"
        save_graph(path3, np.array([0.5, 0.9]), str(path))
        model = load_model(str(path))
        assert model.is_independent
        np.testing.assert_allclose(np.diag(model.cross_cov), [0.25, 0.09])
