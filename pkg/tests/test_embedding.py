import numpy as np
import pytest

from classes.corpus import Vocabulary, build_vocab
from classes.embedding import VectorFormatError, load_pretrained, token_embed
from classes.numerics import ContractError, Graph, lrel
from tests.conftest import fixture_path
from tests.test_numerics import numeric_gradient


@pytest.fixture
def nodes():
    graph = Graph()
    rng = np.random.default_rng(0)
    tensors = {
        "embed.form": rng.normal(size=(3, 5)),
        "embed.fpos": rng.normal(size=(3, 4)),
        "embed.feats": rng.normal(size=(3, 4)),
        "proj.P": rng.normal(size=(2, 3)),
        "proj.b": rng.normal(size=2),
    }
    return graph, {name: graph.input(value, name=name) for name, value in tensors.items()}, tensors


class TestTokenEmbed:

    def test_additive_projection(self, nodes):
        graph, bound, tensors = nodes
        x = token_embed(graph, bound, {"form": 2, "fpos": 3, "feats": [1, 2]}, ["form", "fpos", "feats"])
        additive = tensors["embed.form"][:, 2] + tensors["embed.fpos"][:, 3] + tensors["embed.feats"][:, [1, 2]].sum(axis=1)
        expected = lrel(tensors["proj.P"] @ additive + tensors["proj.b"])
        np.testing.assert_allclose(x.value, expected)

    def test_inactive_channels_are_ignored(self, nodes):
        graph, bound, tensors = nodes
        x = token_embed(graph, bound, {"form": 4, "fpos": 0, "feats": []}, ["form"])
        expected = lrel(tensors["proj.P"] @ tensors["embed.form"][:, 4] + tensors["proj.b"])
        np.testing.assert_allclose(x.value, expected)

    def test_out_of_range_id(self, nodes):
        graph, bound, _ = nodes
        with pytest.raises(ContractError):
            token_embed(graph, bound, {"form": 5}, ["form"])

    def test_gradients_reach_selected_columns_and_projection(self, nodes):
        _, _, tensors = nodes
        ids = {"form": 2, "fpos": 3, "feats": [1, 2]}
        channels = ["form", "fpos", "feats"]
        weights = np.random.default_rng(1).normal(size=2)

        def objective(values):
            graph = Graph()
            bound = {name: graph.input(value, name=name) for name, value in values.items()}
            return graph, graph.dot(graph.input(weights), token_embed(graph, bound, ids, channels))

        graph, root = objective(tensors)
        grads = graph.gradients(root)
        for name in ("embed.form", "embed.fpos", "embed.feats", "proj.P"):
            def value_of(array, name=name):
                return float(np.sum(objective({**tensors, name: array})[1].value))
            numeric = numeric_gradient(value_of, tensors[name].copy())
            np.testing.assert_allclose(grads[name], numeric, rtol=1e-5, atol=1e-8)
        assert np.count_nonzero(grads["embed.form"][:, [0, 1, 3, 4]]) == 0
        assert np.count_nonzero(grads["embed.form"][:, 2]) > 0


class TestLoadPretrained:

    def test_overwrites_in_vocabulary_columns(self, toy_sentences):
        vocabulary = build_vocab(toy_sentences, ["form"])
        table = np.zeros((3, vocabulary.size("form")))
        count = load_pretrained(fixture_path("vectors.vec"), table, vocabulary)
        assert count == 3
        np.testing.assert_allclose(table[:, vocabulary.lookup("form", "dog")], [0.4, 0.5, 0.6])
        np.testing.assert_array_equal(table[:, Vocabulary.UNK_ID], 0.0)
        np.testing.assert_array_equal(table[:, Vocabulary.ROOT_ID], 0.0)

    def test_dimension_mismatch_names_dimensions(self, toy_sentences):
        vocabulary = build_vocab(toy_sentences, ["form"])
        table = np.zeros((4, vocabulary.size("form")))
        with pytest.raises(VectorFormatError, match="expected 4, found 3"):
            load_pretrained(fixture_path("vectors.vec"), table, vocabulary)

    def test_malformed_line(self, toy_sentences, tmp_path):
        vocabulary = build_vocab(toy_sentences, ["form"])
        path = tmp_path / "bad.vec"
        path.write_text("the 0.1 0.2 0.3\ndog 0.1 oops 0.3\n", encoding="utf-8")
        with pytest.raises(VectorFormatError, match="line 2"):
            load_pretrained(str(path), np.zeros((3, vocabulary.size("form"))), vocabulary)

    def test_headerless_file(self, toy_sentences, tmp_path):
        vocabulary = build_vocab(toy_sentences, ["form"])
        path = tmp_path / "plain.vec"
        path.write_text("cat 1 2 3\n", encoding="utf-8")
        table = np.zeros((3, vocabulary.size("form")))
        assert load_pretrained(str(path), table, vocabulary) == 1
        np.testing.assert_allclose(table[:, vocabulary.lookup("form", "cat")], [1.0, 2.0, 3.0])
