import numpy as np
import pytest

from classes.attention import SCORE_COUNTER, attend, predict_relation, run_query_forward, soft_head
from classes.network import NetworkOptions, ParserNetwork
from classes.numerics import Graph, softmax
from classes.parameters import gru_shapes
from tests.conftest import random_model


class TestAttend:

    def test_matches_reference_scores(self):
        rng = np.random.default_rng(0)
        graph = Graph()
        C, D, v = rng.normal(size=(3, 4)), rng.normal(size=(3, 3)), rng.normal(size=3)
        nodes = {"q.C": graph.input(C), "q.D": graph.input(D), "q.v": graph.input(v)}
        memory_values = rng.normal(size=(5, 4))
        q = rng.normal(size=3)
        a = attend(graph, nodes, "q", graph.input(q), [graph.input(m) for m in memory_values])
        expected = softmax(np.array([v @ np.tanh(C @ m + D @ q) for m in memory_values]))
        np.testing.assert_allclose(a.value, expected, atol=1e-12)
        assert graph.counters[SCORE_COUNTER] == 5

    def test_soft_head_root_exclusion(self):
        graph = Graph()
        memory = [graph.input(np.array([1.0, 0.0])), graph.input(np.array([0.0, 1.0])), graph.input(np.array([2.0, 2.0]))]
        a = graph.input(np.array([0.5, 0.25, 0.25]))
        np.testing.assert_allclose(soft_head(graph, a, memory).value, [1.0, 0.75])
        np.testing.assert_allclose(soft_head(graph, a, memory, include_root=False).value, [0.5, 0.75])

    def test_soft_head_single_slot_keeps_root(self):
        graph = Graph()
        memory = [graph.input(np.array([1.0, 2.0]))]
        a = graph.input(np.array([1.0]))
        np.testing.assert_allclose(soft_head(graph, a, memory, include_root=False).value, [1.0, 2.0])


class TestPredictRelation:

    def bind(self, graph, m, e=4, d=3, seed=0, zero=False):
        rng = np.random.default_rng(seed)
        shapes = {"relation.U": (m, 2 * e), "relation.W": (m, 2 * d), "relation.b": (m,)}
        tensors = {name: np.zeros(shape) if zero else rng.normal(size=shape) for name, shape in shapes.items()}
        inputs = [rng.normal(size=e), rng.normal(size=e), rng.normal(size=d), rng.normal(size=d)]
        return tensors, {name: graph.input(value) for name, value in tensors.items()}, inputs

    def test_matches_reference_formula(self):
        graph = Graph()
        tensors, nodes, (soft_l, soft_r, q_l, q_r) = self.bind(graph, m=5)
        y = predict_relation(graph, nodes, *(graph.input(v) for v in (soft_l, soft_r, q_l, q_r)))
        logits = (tensors["relation.U"] @ np.concatenate([soft_l, soft_r])
                  + tensors["relation.W"] @ np.concatenate([q_l, q_r]) + tensors["relation.b"])
        np.testing.assert_allclose(y.value, softmax(logits), atol=1e-12)

    def test_zero_parameters_give_uniform_labels(self):
        graph = Graph()
        _, nodes, inputs = self.bind(graph, m=4, zero=True)
        y = predict_relation(graph, nodes, *(graph.input(v) for v in inputs))
        np.testing.assert_allclose(y.value, np.full(4, 0.25))

    def test_single_label(self):
        graph = Graph()
        _, nodes, inputs = self.bind(graph, m=1, seed=3)
        np.testing.assert_allclose(predict_relation(graph, nodes, *(graph.input(v) for v in inputs)).value, [1.0])


class TestQueryRecurrence:

    E, X, D = 4, 3, 3

    def bind(self, graph, seed=0, zero=False):
        rng = np.random.default_rng(seed)
        shapes = dict(gru_shapes("query.left.gru", self.E + self.X, self.D))
        shapes.update({"query.left.C": (self.D, self.E), "query.left.D": (self.D, self.D), "query.left.v": (self.D,)})
        return {name: graph.input(np.zeros(shape) if zero else rng.normal(scale=0.5, size=shape))
                for name, shape in shapes.items()}

    def test_query_ignores_later_tokens_with_fixed_memory(self):
        rng = np.random.default_rng(1)
        memory_values = rng.normal(size=(5, self.E))
        base = rng.normal(size=(5, self.X))
        changed = base.copy()
        changed[3] += 1.0
        graph = Graph()
        nodes = self.bind(graph)
        memory = [graph.input(m) for m in memory_values]
        first = run_query_forward(graph, nodes, memory, [graph.input(x) for x in base])
        second = run_query_forward(graph, nodes, memory, [graph.input(x) for x in changed])
        for t in (1, 2):
            np.testing.assert_array_equal(first[t - 1].q.value, second[t - 1].q.value)
        assert not np.allclose(first[2].q.value, second[2].q.value)

    def test_zero_parameters_attend_uniformly(self):
        rng = np.random.default_rng(2)
        graph = Graph()
        nodes = self.bind(graph, zero=True)
        memory = [graph.input(m) for m in rng.normal(size=(4, self.E))]
        steps = run_query_forward(graph, nodes, memory, [graph.input(x) for x in rng.normal(size=(4, self.X))])
        assert len(steps) == 3
        for step in steps:
            np.testing.assert_allclose(step.a.value, np.full(4, 0.25))


class TestNetworkAttention:

    @pytest.mark.parametrize("directions", ["both", "l2r", "r2l"])
    def test_rows_are_distributions(self, directions):
        network, params, vocabulary, sentences = random_model(seed=1, directions=directions)
        for sentence in sentences:
            record = network.forward(params, vocabulary.encode(sentence)).record()
            for matrix in (record.a_left, record.a_right):
                if matrix is None:
                    continue
                assert matrix.shape == (sentence.n, sentence.n + 1)
                np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-10)
            np.testing.assert_allclose(record.y.sum(axis=1), 1.0, atol=1e-10)
            assert (record.a_left is None) == (directions == "r2l")
            assert (record.a_right is None) == (directions == "l2r")

    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_score_count_is_quadratic(self, n):
        network, params, vocabulary, sentences = random_model(seed=2)
        ids = vocabulary.encode(sentences[0])
        ids = [ids[0]] + [ids[1 + (k % (len(ids) - 1))] for k in range(n)]
        graph = Graph()
        network.forward(params, ids, graph)
        assert graph.counters[SCORE_COUNTER] == 2 * n * (n + 1)

    def test_single_direction_counts_half(self):
        network, params, vocabulary, sentences = random_model(seed=2, directions="l2r")
        graph = Graph()
        network.forward(params, vocabulary.encode(sentences[0]), graph)
        n = sentences[0].n
        assert graph.counters[SCORE_COUNTER] == n * (n + 1)

    def test_soft_head_feed_changes_queries(self):
        _, params, vocabulary, sentences = random_model(seed=3)
        ids = vocabulary.encode(sentences[0])
        fed = ParserNetwork(NetworkOptions(channels=("form", "fpos"))).forward(params, ids).record()
        unfed = ParserNetwork(NetworkOptions(channels=("form", "fpos"), feed_soft_head=False)).forward(params, ids).record()
        np.testing.assert_allclose(fed.a_left[0], unfed.a_left[0])
        assert not np.allclose(fed.a_left[1:], unfed.a_left[1:])

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValueError):
            ParserNetwork(NetworkOptions(channels=("form",), directions="sideways"))
