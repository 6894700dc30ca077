import numpy as np
import pytest

from classes.corpus import Sentence, is_tree
from classes.model_archive import ModelArchive
from classes.network import NetworkOptions
from classes.parser import DependencyParser
from tests.conftest import random_model


@pytest.fixture
def parser():
    _, params, vocabulary, _ = random_model(seed=4)
    return DependencyParser(params, vocabulary, NetworkOptions(channels=("form", "fpos")))


class TestDependencyParser:

    def test_mst_output_is_a_tree(self, parser):
        for sentence in random_model(seed=5)[3]:
            tree = parser.parse(sentence)
            assert tree.n == sentence.n
            assert is_tree(tree.heads)
            assert all(label in parser.vocabulary.relations for label in tree.rels)

    def test_single_root(self, parser):
        parser.single_root = True
        for sentence in random_model(seed=6)[3]:
            assert parser.parse(sentence).heads.count(0) == 1

    def test_greedy_follows_argmax(self, parser):
        parser.mode = "greedy"
        sentence = random_model(seed=7)[3][0]
        record = parser.attention(sentence)
        scores = np.log(record.a_left) + np.log(record.a_right)
        np.fill_diagonal(scores[:, 1:], -np.inf)
        assert parser.parse(sentence).heads == [int(j) for j in np.argmax(scores, axis=1)]

    def test_attention_record(self, parser):
        sentence = random_model(seed=8)[3][0]
        record = parser.attention(sentence)
        n = sentence.n
        assert record.a_left.shape == (n, n + 1)
        assert record.a_right.shape == (n, n + 1)
        assert record.y.shape == (n, parser.vocabulary.relation_count)
        assert record.soft_left.shape == (n, 8)
        assert record.q_right.shape == (n, 4)

    def test_empty_sentence(self, parser):
        tree = parser.parse(Sentence([]))
        assert tree.heads == [] and tree.rels == []

    def test_invalid_mode(self, parser):
        with pytest.raises(ValueError):
            DependencyParser(parser.params, parser.vocabulary, parser.network.options, mode="beam")

    def test_from_archive(self, parser, tmp_path):
        path = str(tmp_path / "model.bin")
        config = {"seed": 4, "train.hidden_size": 4, "train.channels": ["form", "fpos"],
                  "decode.mode": "greedy", "decode.single_root": False}
        ModelArchive(config=config, vocabulary=parser.vocabulary, params=parser.params,
                     channels=["form", "fpos"]).save(path)
        restored = DependencyParser.from_archive(ModelArchive.load(path))
        assert restored.mode == "greedy"
        sentence = random_model(seed=9)[3][1]
        parser.mode = "greedy"
        assert restored.parse(sentence) == parser.parse(sentence)
