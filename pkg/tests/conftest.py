import os
import sys
from typing import List

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from classes.corpus import Sentence, Token, build_vocab, read_conll  # noqa: E402
from classes.network import NetworkOptions, ParserNetwork  # noqa: E402
from classes.trainer import TrainConfig, Trainer, init_params  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

NOUNS = ["dog", "cat", "bird", "fish"]
VERBS = ["chased", "saw", "liked"]


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def make_sentence(rows) -> Sentence:
    """rows: (form, fpos, head, rel) tuples."""
    return Sentence([Token(form=form, lemma=None, cpos=None, fpos=fpos, feats=[], gold_head=head, gold_rel=rel)
                     for form, fpos, head, rel in rows])


def toy_treebank(count: int, seed: int = 0) -> List[Sentence]:
    """Templated sentences whose trees are fully determined by their POS pattern."""
    rng = np.random.default_rng(seed)
    sentences = []
    for index in range(count):
        subject, obj = rng.choice(NOUNS, size=2)
        verb = str(rng.choice(VERBS))
        if index % 2 == 0:
            rows = [("the", "DT", 2, "det"), (str(subject), "NN", 3, "nsubj"), (verb, "VBD", 0, "root"),
                    ("the", "DT", 5, "det"), (str(obj), "NN", 3, "dobj"), (".", ".", 3, "punct")]
        else:
            rows = [(str(subject), "NNS", 2, "nsubj"), (verb, "VBD", 0, "root"), (str(obj), "NNS", 2, "dobj"),
                    (".", ".", 2, "punct")]
        sentences.append(make_sentence(rows))
    return sentences


@pytest.fixture
def toy_sentences() -> List[Sentence]:
    return read_conll(fixture_path("toy.conll"))


@pytest.fixture
def small_trainer(toy_sentences) -> Trainer:
    config = TrainConfig(hidden_size=4, max_epochs=2, seed=3)
    return Trainer.for_corpus(config, toy_sentences)


@pytest.fixture
def small_model(small_trainer):
    """(network, params, vocabulary) of an untrained d = 4 model over the toy fixture."""
    params = small_trainer.initial_params(4)
    return small_trainer.network, params, small_trainer.vocabulary


def random_model(seed: int = 0, hidden_size: int = 4, directions: str = "both"):
    sentences = toy_treebank(8, seed)
    vocabulary = build_vocab(sentences, ["form", "fpos"])
    options = NetworkOptions(channels=("form", "fpos"), directions=directions)
    trainer = Trainer(TrainConfig(hidden_size=hidden_size, directions=directions, seed=seed), vocabulary, ["form", "fpos"])
    params = init_params(trainer.shapes(hidden_size), seed, 0.5)
    return ParserNetwork(options), params, vocabulary, sentences
