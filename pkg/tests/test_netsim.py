import numpy as np
import pytest

from moments import moment_matrix
from netsim import (
    ModelNotPSDError,
    build_sampler,
    draw_topologies,
    estimate_link_moments,
    exact_joint_distribution,
    implied_covariance,
    load_trajectory,
    monte_carlo_mse,
    run_consensus,
    sample_topology,
    save_trajectory,
)
from optimizer import metropolis_weights
from spectrum import mode_decomposition, phi_n
from supergraph import (
    Supergraph,
    build_correlations,
    deterministic_model,
    generate_connected_geometric,
    independent_model,
    spatial_model,
)
from supergraph.link_model import LinkStatModel


def two_edge_model(r):
    graph = Supergraph(3, ((0, 1), (1, 2)))
    return LinkStatModel(graph, [0.5, 0.5], np.array([[0.25, r], [r, 0.25]]))


def joint_moments(outcomes, probs):
    mean = probs @ outcomes
    centered = outcomes - mean
    return mean, (centered * probs[:, None]).T @ centered


class TestBuildSampler:
    def test_diagonal_model_has_no_coefficients(self, path3):
        sampler = build_sampler(independent_model(path3, [0.3, 0.6]))
        np.testing.assert_array_equal(sampler.coefficients, 0.0)

    def test_two_edge_coefficient(self):
        sampler = build_sampler(two_edge_model(0.1))
        assert sampler.coefficients[1, 0] == pytest.approx(0.4, abs=1e-14)
        assert sampler.coefficients[0, 0] == 0.0

    def test_two_edge_conditional_means(self):
        _, probs = exact_joint_distribution(build_sampler(two_edge_model(0.1)))
        # outcomes in order 00, 01, 10, 11; edge 2 is on with prob 0.3 after edge 1 off, 0.7 after on
        np.testing.assert_allclose(probs[1] / (probs[0] + probs[1]), 0.3, atol=1e-14)
        np.testing.assert_allclose(probs[3] / (probs[2] + probs[3]), 0.7, atol=1e-14)

    def test_rejects_non_psd(self):
        with pytest.raises(ModelNotPSDError):
            build_sampler(two_edge_model(0.3))


class TestExactness:
    @pytest.mark.parametrize("r", [0.0, 0.05, 0.1, -0.08])
    def test_two_edges(self, r):
        model = two_edge_model(r)
        mean, cov = joint_moments(*exact_joint_distribution(build_sampler(model)))
        np.testing.assert_allclose(mean, model.probs, atol=1e-12)
        np.testing.assert_allclose(cov, model.cross_cov, atol=1e-12)

    def test_triangle(self):
        graph = Supergraph(3, ((0, 1), (0, 2), (1, 2)))
        model = build_correlations(graph, np.array([0.6, 0.7, 0.8]), 0.2)
        outcomes, probs = exact_joint_distribution(build_sampler(model))
        assert probs.sum() == pytest.approx(1.0, abs=1e-14)
        mean, cov = joint_moments(outcomes, probs)
        np.testing.assert_allclose(mean, model.probs, atol=1e-12)
        np.testing.assert_allclose(cov, model.cross_cov, atol=1e-12)

    def test_enumeration_limit(self):
        big = generate_connected_geometric(10, 13, np.random.default_rng(0))
        with pytest.raises(ValueError):
            exact_joint_distribution(build_sampler(spatial_model(big.graph, big.radius)))


def clamping_triangle():
    # the linear family pushes link 3 above 1 whenever links 1 and 2 are both on
    graph = Supergraph(3, ((0, 1), (0, 2), (1, 2)))
    gamma = np.array([[0.25, 0.2, 0.05],
                      [0.2, 0.25, 0.05],
                      [0.05, 0.05, 0.09]])
    return LinkStatModel(graph, [0.5, 0.5, 0.9], gamma)


class TestCalibration:
    @pytest.mark.parametrize("r", [0.0, 0.1, -0.08])
    def test_two_edges_keep_exact_regression(self, r):
        sampler = build_sampler(two_edge_model(r))
        np.testing.assert_array_equal(sampler.attenuation, 1.0)
        np.testing.assert_array_equal(sampler.effective, sampler.coefficients)
        assert not sampler.attenuated

    def test_uncalibrated_sampler_biases_marginals(self):
        sampler = build_sampler(clamping_triangle(), calibration_samples=0)
        np.testing.assert_array_equal(sampler.effective, sampler.coefficients)
        mean, _ = joint_moments(*exact_joint_distribution(sampler))
        assert mean[2] < 0.9 - 1e-3
        _, clamped = draw_topologies(sampler, np.random.default_rng(0), 2000)
        assert clamped > 500

    def test_shrunk_regression_keeps_marginals(self):
        model = clamping_triangle()
        sampler = build_sampler(model)
        assert sampler.attenuated
        np.testing.assert_array_equal(sampler.attenuation[:2], 1.0)
        assert sampler.attenuation[2] == pytest.approx(0.9, abs=1e-6)
        mean, cov = joint_moments(*exact_joint_distribution(sampler))
        np.testing.assert_allclose(mean, model.probs, atol=1e-12)
        np.testing.assert_allclose(cov[:2, :2], model.cross_cov[:2, :2], atol=1e-12)
        np.testing.assert_allclose(cov[2, :2], 0.9 * model.cross_cov[2, :2], atol=1e-6)
        np.testing.assert_allclose(implied_covariance(sampler), cov, atol=1e-8)

    def test_implied_covariance_of_exact_sampler(self):
        model = build_correlations(Supergraph(3, ((0, 1), (0, 2), (1, 2))), np.array([0.6, 0.7, 0.8]), 0.2)
        np.testing.assert_allclose(implied_covariance(build_sampler(model)), model.cross_cov, atol=1e-12)

    def test_dense_model_rarely_clamps(self):
        generated = generate_connected_geometric(20, 60, np.random.default_rng(4))
        model = spatial_model(generated.graph, generated.radius, c1=0.6, c2=0.2)
        sampler = build_sampler(model)
        freq, _ = estimate_link_moments(sampler, 50_000, np.random.default_rng(5))
        assert sampler.clamp_rate <= 0.01
        np.testing.assert_allclose(freq, model.probs, atol=0.01)


class TestSampling:
    def test_always_alive_links(self, path3):
        model = build_correlations(path3, np.array([1.0, 0.6]), 0.2)
        active, clamped = draw_topologies(build_sampler(model), np.random.default_rng(0), 5000)
        assert active[:, 0].all()
        assert clamped == 0

    def test_counters(self, small_model):
        sampler = build_sampler(small_model)
        mask = sample_topology(sampler, np.random.default_rng(1))
        assert mask.shape == (small_model.n_edges,)
        assert mask.dtype == bool
        assert sampler.draw_count == small_model.n_edges
        assert 0.0 <= sampler.clamp_rate <= 1.0

    def test_consumes_fixed_uniforms(self, small_model):
        sampler = build_sampler(small_model)
        rng = np.random.default_rng(2)
        draw_topologies(sampler, rng, 10)
        reference = np.random.default_rng(2)
        reference.random((10, small_model.n_edges))
        assert rng.random() == reference.random()

    def test_empirical_moments(self, small_model):
        sampler = build_sampler(small_model)
        freq, cov = estimate_link_moments(sampler, 100_000, np.random.default_rng(3))
        np.testing.assert_allclose(freq, small_model.probs, atol=0.01)
        np.testing.assert_allclose(cov, small_model.cross_cov, atol=0.02)
        assert sampler.clamp_rate <= 0.01

    @pytest.mark.slow
    def test_empirical_moments_full_scale(self):
        generated = generate_connected_geometric(120, 449, np.random.default_rng(0))
        model = spatial_model(generated.graph, generated.radius)
        sampler = build_sampler(model)
        freq, cov = estimate_link_moments(sampler, 100_000, np.random.default_rng(1))
        np.testing.assert_allclose(freq, model.probs, atol=0.01)
        np.testing.assert_allclose(cov, model.cross_cov, atol=0.02)
        assert sampler.clamp_rate <= 0.01


class TestOneStepIdentity:
    def test_conditional_expectation(self, small_model):
        """E[||e(k+1)||^2 | e(k)] = e(k)^T M e(k)."""
        rng = np.random.default_rng(4)
        graph = small_model.graph
        b = graph.incidence
        sampler = build_sampler(small_model)
        base = metropolis_weights(graph).values
        n_samples = 100_000
        for _ in range(10):
            w = base * rng.uniform(0.5, 1.5, graph.n_edges)
            e = rng.standard_normal(graph.n_nodes)
            e -= e.mean()
            active, _ = draw_topologies(sampler, rng, n_samples)
            nxt = e - (active * (w * (b.T @ e))) @ b.T
            nxt -= nxt.mean(axis=1, keepdims=True)
            energies = np.einsum("sn,sn->s", nxt, nxt)
            stderr = energies.std(ddof=1) / np.sqrt(n_samples)
            expected = e @ moment_matrix(w, small_model) @ e
            assert abs(energies.mean() - expected) <= 5 * stderr


class TestRunConsensus:
    def test_zero_horizon(self, small_model):
        x0 = np.arange(small_model.graph.n_nodes, dtype=float)
        energies = run_consensus(metropolis_weights(small_model.graph), build_sampler(small_model),
                                 x0, 0, np.random.default_rng(0))
        assert energies.shape == (1,)
        assert energies[0] == pytest.approx(np.sum((x0 - x0.mean()) ** 2))

    def test_consensus_start(self, small_model):
        x0 = np.full(small_model.graph.n_nodes, 2.0)
        energies = run_consensus(metropolis_weights(small_model.graph), build_sampler(small_model),
                                 x0, 20, np.random.default_rng(0))
        np.testing.assert_allclose(energies, 0.0, atol=1e-25)

    def test_static_matches_modes(self, small_model):
        graph = small_model.graph
        w = metropolis_weights(graph)
        x0 = np.random.default_rng(5).standard_normal(graph.n_nodes)
        e0 = x0 - x0.mean()
        energies = run_consensus(w, build_sampler(deterministic_model(graph)), x0, 60,
                                 np.random.default_rng(0))
        for k in (0, 1, 10, 60):
            zeta = mode_decomposition(w, graph, e0, k)
            assert energies[k] == pytest.approx(np.sum(zeta ** 2), rel=1e-8)

    def test_wrong_length(self, small_model):
        with pytest.raises(ValueError):
            run_consensus(metropolis_weights(small_model.graph), build_sampler(small_model),
                          np.zeros(3), 5, np.random.default_rng(0))


class TestMonteCarloMSE:
    def test_single_trial(self, small_model):
        trajectory = monte_carlo_mse(metropolis_weights(small_model.graph), build_sampler(small_model),
                                     10, 1, seed=0)
        np.testing.assert_array_equal(trajectory.stderr, 0.0)
        assert trajectory.mse[0] == pytest.approx(1.0)

    def test_unit_initial_energy(self, small_model):
        trajectory = monte_carlo_mse(metropolis_weights(small_model.graph), build_sampler(small_model),
                                     5, 20, seed=1)
        assert trajectory.mse[0] == pytest.approx(1.0)
        assert trajectory.stderr[0] == pytest.approx(0.0, abs=1e-15)
        assert np.all(np.isfinite(trajectory.mse)) and np.all(trajectory.mse >= 0)

    def test_worker_count_does_not_matter(self, small_model):
        w = metropolis_weights(small_model.graph)
        serial = monte_carlo_mse(w, build_sampler(small_model), 15, 12, seed=42, workers=1)
        threaded = monte_carlo_mse(w, build_sampler(small_model), 15, 12, seed=42, workers=4)
        np.testing.assert_array_equal(serial.mse, threaded.mse)
        np.testing.assert_array_equal(serial.stderr, threaded.stderr)

    def test_seed_changes_result(self, small_model):
        w = metropolis_weights(small_model.graph)
        first = monte_carlo_mse(w, build_sampler(small_model), 10, 5, seed=1)
        second = monte_carlo_mse(w, build_sampler(small_model), 10, 5, seed=2)
        assert not np.array_equal(first.mse, second.mse)

    def test_mean_square_contraction(self, small_model):
        w = metropolis_weights(small_model.graph)
        lambda_1 = phi_n(w, small_model, 1)
        horizon = 60
        trajectory = monte_carlo_mse(w, build_sampler(small_model), horizon, 200, seed=3)
        assert trajectory.mse[horizon] <= trajectory.mse[0] * lambda_1 ** horizon * 10
        assert trajectory.moment_exact

    def test_per_step_ratio_bound(self, small_model):
        w = metropolis_weights(small_model.graph)
        lambda_1 = phi_n(w, small_model, 1)
        trajectory = monte_carlo_mse(w, build_sampler(small_model), 30, 200, seed=4)
        ratio = trajectory.mse[1:] / trajectory.mse[:-1]
        # relative standard error of a ratio of two sample means
        slack = 3 * ratio * np.hypot(trajectory.stderr[1:] / trajectory.mse[1:],
                                     trajectory.stderr[:-1] / trajectory.mse[:-1])
        assert np.all(ratio <= lambda_1 + slack + 1e-12)

    def test_trajectory_file(self, small_model, tmp_path):
        trajectory = monte_carlo_mse(metropolis_weights(small_model.graph), build_sampler(small_model),
                                     4, 3, seed=9)
        path = tmp_path / "metropolis.trajectory.csv"
        save_trajectory(trajectory, str(path))
        assert path.read_text().splitlines()[0] == "k,mse,stderr"
        loaded = load_trajectory(str(path))
        np.testing.assert_array_equal(loaded.mse, trajectory.mse)
        np.testing.assert_array_equal(loaded.stderr, trajectory.stderr)
        assert loaded.horizon == 4

    def test_invalid_trials(self, small_model):
        with pytest.raises(ValueError):
            monte_carlo_mse(metropolis_weights(small_model.graph), build_sampler(small_model), 4, 0, seed=0)
