import time

import numpy as np
import pytest

from classes.checks import brute_force_arborescence
from classes.corpus import is_tree
from classes.decoder import combine_scores, greedy_decode, label_arcs, mst_decode, tree_score
from classes.network import NetworkOptions
from classes.parser import DependencyParser
from tests.conftest import make_sentence, random_model

NEG = -np.inf

# greedy heads 1 -> 2, 2 -> 1 form a cycle
CYCLE_SCORES = np.array([
    [-3.0, NEG, -0.1, -4.0],
    [-2.5, -0.1, NEG, -3.9],
    [-0.1, -3.0, -3.0, NEG],
])


class TestCombineScores:

    def test_sum_of_logs_and_masked_self_arcs(self):
        a_left = np.array([[0.5, 0.25, 0.25], [0.2, 0.4, 0.4]])
        a_right = np.array([[0.1, 0.1, 0.8], [0.6, 0.2, 0.2]])
        scores = combine_scores(a_left, a_right)
        assert scores[0, 1] == NEG
        assert scores[1, 2] == NEG
        assert scores[0, 2] == pytest.approx(np.log(0.25) + np.log(0.8))
        assert scores[1, 0] == pytest.approx(np.log(0.2) + np.log(0.6))

    def test_single_direction(self):
        a_left = np.array([[0.5, 0.5]])
        np.testing.assert_allclose(combine_scores(a_left, None)[0, 0], np.log(0.5))

    def test_zero_probability_is_clamped(self):
        scores = combine_scores(np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]), None)
        assert np.isfinite(scores[0, 0])

    def test_needs_one_direction(self):
        with pytest.raises(ValueError):
            combine_scores(None, None)


class TestDecoding:

    def test_greedy_ties_go_to_smallest_head(self):
        assert greedy_decode(np.array([[1.0, NEG, 1.0], [2.0, 2.0, NEG]])) == [0, 0]

    def test_greedy_may_cycle_but_mst_does_not(self):
        greedy = greedy_decode(CYCLE_SCORES)
        assert greedy == [2, 1, 0]
        assert not is_tree(greedy)
        heads = mst_decode(CYCLE_SCORES)
        assert heads == [2, 0, 0]
        assert is_tree(heads)

    def test_single_root(self):
        heads = mst_decode(CYCLE_SCORES, single_root=True)
        assert heads == [2, 3, 0]
        assert tree_score(CYCLE_SCORES, heads) == pytest.approx(-4.1)

    def test_empty_and_single_token(self):
        assert mst_decode(np.zeros((0, 1))) == []
        assert mst_decode(np.array([[0.0, NEG]])) == [0]

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            n = int(rng.integers(1, 7))
            scores = rng.normal(size=(n, n + 1))
            for single_root in (False, True):
                heads = mst_decode(scores, single_root=single_root)
                optimum, _ = brute_force_arborescence(scores, single_root=single_root)
                assert is_tree(heads)
                assert tree_score(scores, heads) == pytest.approx(optimum, abs=1e-9)
                if single_root:
                    assert heads.count(0) == 1

    def test_constant_shift_keeps_trees(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            scores = rng.normal(size=(n, n + 1))
            shift = float(rng.normal(scale=10.0))
            assert greedy_decode(scores + shift) == greedy_decode(scores)
            for single_root in (False, True):
                assert mst_decode(scores + shift, single_root) == mst_decode(scores, single_root)

    def test_mst_never_loses_to_a_valid_greedy_tree(self):
        rng = np.random.default_rng(6)
        valid = 0
        for _ in range(200):
            n = int(rng.integers(1, 7))
            scores = rng.normal(size=(n, n + 1))
            scores[:, 0] += 1.0
            greedy = greedy_decode(scores)
            if not is_tree(greedy):
                continue
            valid += 1
            assert tree_score(scores, mst_decode(scores)) == pytest.approx(tree_score(scores, greedy), abs=1e-12)
        assert valid > 0

    def test_label_arcs(self):
        y = np.array([[0.1, 0.9], [0.5, 0.5]])
        assert label_arcs([0, 1], y) == [1, 0]
        with pytest.raises(ValueError):
            label_arcs([0], y)


@pytest.mark.slow
def test_parse_time_grows_quadratically():
    _, params, vocabulary, _ = random_model(seed=4)
    parser = DependencyParser(params, vocabulary, NetworkOptions(channels=("form", "fpos")))
    timings = {}
    for n in (20, 40, 80):
        sentence = make_sentence([("dog", "NN", 0, "root")] * n)
        runs = []
        for _ in range(3):
            started = time.perf_counter()
            parser.parse(sentence)
            runs.append(time.perf_counter() - started)
        timings[n] = min(runs)
    for small, large in ((20, 40), (40, 80)):
        ratio = timings[large] / timings[small]
        assert 2.0 <= ratio <= 8.0, f"n={small}->{large}: time ratio {ratio:.2f}"
