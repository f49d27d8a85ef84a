"""Upward-downward smoothing and tree Viterbi against hand cases, the chain
module (path topologies) and the enumeration oracle."""

import math

import numpy as np
import pytest

from hmmentropy import (Categorical, HmmModel, ImpossibleObservationError,
                        ObservedSequence, ObservedTree, TreeTopology,
                        enumerate_tree, smooth_chain, smooth_tree, upward_pass,
                        viterbi_chain, viterbi_profiles, viterbi_tree)

from conftest import (random_chain_instance, random_tree_instance,
                      random_topology, state_revealing_model, uniform_model)


def star_tree():
    return ObservedTree(TreeTopology([-1, 0, 0]), [0, 0, 0])


class TestUpwardDownward:
    def test_single_vertex(self, m1):
        tree = ObservedTree(TreeTopology([-1]), [[0]])
        post = smooth_tree(m1, tree)
        np.testing.assert_allclose(post.beta[0], [0.8, 0.2], rtol=1e-12)
        assert post.normalizers[0] == pytest.approx(0.5, rel=1e-12)
        np.testing.assert_array_equal(post.smoothed[0], post.beta[0])

    def test_star_evidence(self, m1):
        post = upward_pass(m1, star_tree())
        assert post.normalizers.prod() == pytest.approx(0.2258, rel=1e-12)
        assert math.exp(post.log_likelihood) == pytest.approx(0.2258, rel=1e-12)

    def test_star_smoothed(self, m1):
        post = smooth_tree(m1, star_tree())
        np.testing.assert_allclose(post.smoothed[0],
                                   [0.970062001771479, 0.029937998228521], atol=1e-12)
        np.testing.assert_allclose(post.smoothed[1],
                                   [0.9530558015943312, 0.0469441984056688], atol=1e-12)
        np.testing.assert_allclose(post.smoothed[1], post.smoothed[2], atol=1e-15)

    def test_deterministic_emissions(self):
        model = state_revealing_model(2)
        topo = random_topology(np.random.default_rng(0), 12)
        values = np.random.default_rng(1).integers(0, 2, size=12)
        tree = ObservedTree(topo, values)
        post = smooth_tree(model, tree)
        np.testing.assert_allclose(post.smoothed, np.eye(2)[values], atol=1e-12)

    def test_uniform_degenerate(self):
        model = uniform_model(3, alphabet=2)
        topo = random_topology(np.random.default_rng(2), 9)
        tree = ObservedTree(topo, np.zeros(9, dtype=int))
        post = smooth_tree(model, tree)
        np.testing.assert_allclose(post.smoothed, np.full((9, 3), 1 / 3), atol=1e-12)

    def test_path_tree_equals_chain(self):
        for seed in range(25):
            model, seq = random_chain_instance(seed, max_states=3, max_length=10)
            tree = ObservedTree(
                TreeTopology(np.arange(-1, seq.length - 1)), seq.values)
            chain_post = smooth_chain(model, seq)
            tree_post = smooth_tree(model, tree)
            np.testing.assert_allclose(tree_post.smoothed, chain_post.smoothed,
                                       atol=1e-10)
            assert tree_post.log_likelihood == pytest.approx(
                chain_post.log_likelihood, abs=1e-10)

    def test_matches_oracle(self):
        for seed in range(60):
            model, tree = random_tree_instance(seed, poisson=True)
            post = smooth_tree(model, tree)
            res = enumerate_tree(model, tree)
            for u in range(tree.num_vertices):
                np.testing.assert_allclose(post.smoothed[u], res.marginal(u),
                                           atol=1e-10)
            assert math.exp(post.log_likelihood) == pytest.approx(
                res.evidence, rel=1e-9)

    def test_invariants(self):
        for seed in range(25):
            model, tree = random_tree_instance(seed)
            post = smooth_tree(model, tree)
            for table in (post.prior, post.beta, post.smoothed):
                np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-9)
            assert np.all(post.normalizers > 0)
            assert np.array_equal(post.smoothed[0], post.beta[0])

    def test_impossible_observation_names_vertex(self):
        model = HmmModel([1.0, 0.0], np.eye(2),
                         [[Categorical([1.0, 0.0])], [Categorical([1.0, 0.0])]])
        tree = ObservedTree(TreeTopology([-1, 0, 0]), [0, 1, 0])
        with pytest.raises(ImpossibleObservationError, match="vertex 1"):
            upward_pass(model, tree)


class TestViterbiTree:
    def test_star(self, m1):
        states, log_joint = viterbi_tree(m1, star_tree())
        np.testing.assert_array_equal(states, [0, 0, 0])
        assert math.exp(log_joint) == pytest.approx(0.20736, rel=1e-12)

    def test_deterministic_emissions(self):
        model = state_revealing_model(3)
        topo = random_topology(np.random.default_rng(4), 10)
        values = np.random.default_rng(5).integers(0, 3, size=10)
        states, _ = viterbi_tree(model, ObservedTree(topo, values))
        np.testing.assert_array_equal(states, values)

    def test_uniform_tie_break(self):
        model = uniform_model(3, alphabet=2)
        topo = random_topology(np.random.default_rng(6), 7)
        tree = ObservedTree(topo, np.zeros(7, dtype=int))
        states, _ = viterbi_tree(model, tree)
        np.testing.assert_array_equal(states, np.zeros(7, dtype=int))

    def test_matches_oracle(self):
        for seed in range(60):
            model, tree = random_tree_instance(seed)
            states, log_joint = viterbi_tree(model, tree)
            res = enumerate_tree(model, tree)
            best, best_prob = res.best_configuration(
                order=tree.topology.downward_order)
            np.testing.assert_array_equal(states, best)
            assert math.exp(log_joint) == pytest.approx(best_prob, rel=1e-9)

    def test_path_equals_chain(self):
        for seed in range(25):
            model, seq = random_chain_instance(seed, max_states=3, max_length=10)
            tree = ObservedTree(
                TreeTopology(np.arange(-1, seq.length - 1)), seq.values)
            chain_path, chain_lj = viterbi_chain(model, seq)
            tree_path, tree_lj = viterbi_tree(model, tree)
            np.testing.assert_array_equal(chain_path, tree_path)
            assert chain_lj == pytest.approx(tree_lj, abs=1e-10)

    def test_all_impossible(self):
        model = HmmModel([1.0, 0.0], np.eye(2),
                         [[Categorical([1.0, 0.0])], [Categorical([0.0, 1.0])]])
        tree = ObservedTree(TreeTopology([-1, 0]), [0, 1])
        with pytest.raises(ImpossibleObservationError):
            viterbi_tree(model, tree)


class TestViterbiProfiles:
    def test_single_vertex_equals_smoothed(self, m1):
        tree = ObservedTree(TreeTopology([-1]), [[0]])
        prof = viterbi_profiles(m1, tree)
        post = smooth_tree(m1, tree)
        np.testing.assert_allclose(prof[0], post.smoothed[0], atol=1e-12)

    def test_star_constrained_value(self, m1):
        prof = viterbi_profiles(m1, star_tree())
        assert prof[0, 1] == pytest.approx(0.1 * 0.18 ** 2 / 0.2258, rel=1e-10)

    def test_deterministic_rows_are_indicators(self):
        model = state_revealing_model(2)
        topo = random_topology(np.random.default_rng(7), 8)
        values = np.random.default_rng(8).integers(0, 2, size=8)
        prof = viterbi_profiles(model, ObservedTree(topo, values))
        np.testing.assert_allclose(prof, np.eye(2)[values], atol=1e-12)

    def test_row_maxima_equal_viterbi_posterior(self):
        for seed in range(30):
            model, tree = random_tree_instance(seed)
            prof = viterbi_profiles(model, tree)
            _, log_joint = viterbi_tree(model, tree)
            ll = upward_pass(model, tree).log_likelihood
            np.testing.assert_allclose(prof.max(axis=1),
                                       math.exp(log_joint - ll), rtol=1e-9)

    def test_matches_oracle(self):
        for seed in range(60):
            model, tree = random_tree_instance(seed)
            prof = viterbi_profiles(model, tree)
            res = enumerate_tree(model, tree)
            for u in range(tree.num_vertices):
                for j in range(model.num_states):
                    assert prof[u, j] == pytest.approx(
                        res.viterbi_profile(u, j), abs=1e-10)
