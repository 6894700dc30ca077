import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from classes.corpus import CorpusSplit, Sentence, Vocabulary, available_channels, POS_CHANNELS, build_vocab
from classes.network import DIRECTION_CHOICES, NetworkOptions, ParserNetwork, SentenceOutputs
from classes.numerics import Graph, Node
from classes.parameters import ParameterSet, is_bias, model_shapes

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

PRETRAINED_EMBEDDING_DIM = 300


class TrainingDivergedError(RuntimeError):
    """Raised when the dev log-likelihood becomes NaN."""


class NonFiniteGradientError(FloatingPointError):
    """Raised when a gradient holds NaN or inf; names the parameter."""

    def __init__(self, name: str) -> None:
        super().__init__(f"non-finite gradient for parameter '{name}'")
        self.name = name


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    lr_grid_start: Optional[float] = None
    lr_grid_step: float = 0.0002
    lr_grid_count: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    hidden_size: int = 128
    embedding_dim: Optional[int] = None
    channels: Sequence[str] = ("auto",)
    pretrained_init: bool = True
    use_pos: bool = True
    directions: str = "both"
    feed_soft_head: bool = True
    soft_head_root: bool = True
    init_std: float = 0.1
    seed: int = 1
    max_epochs: int = 30
    dev_ratio: float = 0.05
    progress: bool = False

    def __post_init__(self) -> None:
        if self.hidden_size < 1:
            raise ValueError(f"Error: hidden_size must be at least 1, got {self.hidden_size}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"Error: learning_rate must be positive, got {self.learning_rate}")
        if self.directions not in DIRECTION_CHOICES:
            raise ValueError(f"Error: directions must be one of {', '.join(DIRECTION_CHOICES)}, got '{self.directions}'")

    def lr_grid(self) -> List[float]:
        """Candidate initial learning rates: start, start + step, ..."""
        if not self.lr_grid_count or self.lr_grid_start is None:
            return []
        return [round(self.lr_grid_start + k * self.lr_grid_step, 10) for k in range(self.lr_grid_count)]

    def resolve_channels(self, sentences: Sequence[Sentence]) -> List[str]:
        """Active channels: 'auto' picks those present in the data; POS channels drop when use_pos is off."""
        if list(self.channels) == ["auto"]:
            channels = available_channels(sentences)
        else:
            channels = list(self.channels)
        if not self.use_pos:
            channels = [channel for channel in channels if channel not in POS_CHANNELS]
        return channels

    def resolve_embedding_dim(self, with_vectors: bool) -> int:
        if self.embedding_dim:
            return self.embedding_dim
        if with_vectors and self.pretrained_init:
            return PRETRAINED_EMBEDDING_DIM
        return self.hidden_size

    def network_options(self, channels: Sequence[str]) -> NetworkOptions:
        return NetworkOptions(channels=tuple(channels), directions=self.directions,
                              feed_soft_head=self.feed_soft_head, soft_head_root=self.soft_head_root)


def init_params(shapes: Mapping[str, Tuple[int, ...]], seed: int, std: float = 0.1) -> ParameterSet:
    """
    Gaussian initialisation N(0, std^2) of every weight; biases start at zero.

    Tensors are drawn in the order of `shapes` from one generator, so a seed
    always gives the same parameters.

    Args:
        shapes (Mapping[str, Tuple[int, ...]]): Shape per parameter name.
        seed (int): Generator seed.
        std (float): Standard deviation; 0.1 gives variance 1e-2.

    Returns:
        ParameterSet: Fresh parameters.
    """
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in shapes.items():
        if is_bias(name):
            tensors[name] = np.zeros(shape, dtype=np.float64)
        else:
            tensors[name] = rng.normal(0.0, std, size=shape)
    return ParameterSet(tensors)


def sentence_loss(graph: Graph, outputs: SentenceOutputs, heads: Sequence[int], rels: Sequence[int]) -> Node:
    """
    Negative log of the joint probability of the gold tree.

    loss = -sum_t [log y_{t, rel_t} + log a^l_{t, head_t} + log a^r_{t, head_t}];
    a disabled direction contributes no term.

    Args:
        graph (Graph): Graph holding the outputs.
        outputs (SentenceOutputs): Network outputs for the sentence.
        heads (Sequence[int]): Gold heads for t = 1 ... n.
        rels (Sequence[int]): Gold relation ids for t = 1 ... n.

    Returns:
        Node: Scalar loss node.
    """
    terms = []
    for index, (head, rel) in enumerate(zip(heads, rels)):
        terms.append(graph.pick_log(outputs.relations[index], rel))
        if outputs.left is not None:
            terms.append(graph.pick_log(outputs.left[index].a, head))
        if outputs.right is not None:
            terms.append(graph.pick_log(outputs.right[index].a, head))
    return graph.add(*terms)


class AdamOptimizer:
    """
    Bias-corrected Adam over a ParameterSet.

    Moments are created lazily per parameter; parameters without a gradient in a
    step are left untouched.
    """

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> None:
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: ParameterSet, grads: Mapping[str, np.ndarray], lr: float) -> None:
        """
        Apply one update in place.

        Raises:
            NonFiniteGradientError: If any gradient is not finite; nothing is updated then.
        """
        for name, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                logger.error(f"Error: aborting Adam step, non-finite gradient for {name}")
                raise NonFiniteGradientError(name)

        self.t += 1
        bias_correction1 = 1.0 - self.beta1 ** self.t
        bias_correction2 = 1.0 - self.beta2 ** self.t
        for name, grad in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(params[name])
                self.v[name] = np.zeros_like(params[name])
            self.m[name] *= self.beta1
            self.m[name] += (1.0 - self.beta1) * grad
            self.v[name] *= self.beta2
            self.v[name] += (1.0 - self.beta2) * (grad * grad)
            m_hat = self.m[name] / bias_correction1
            v_hat = self.v[name] / bias_correction2
            params[name] -= lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


def adam_step(params: ParameterSet, grads: Mapping[str, np.ndarray], state: AdamOptimizer, lr: float) -> AdamOptimizer:
    """Functional form of AdamOptimizer.step; returns the same state object."""
    state.step(params, grads, lr)
    return state


class LearningRateSchedule:
    """
    Dev-driven schedule: after the first drop in dev log-likelihood the rate is
    halved after every epoch; the second drop ends training.
    """

    def __init__(self, learning_rate: float) -> None:
        self.learning_rate = learning_rate
        self.previous: Optional[float] = None
        self.decreases = 0

    def update(self, dev_log_likelihood: float) -> bool:
        """
        Record one epoch's dev log-likelihood.

        Returns:
            bool: False when training should stop.
        """
        if self.previous is not None and dev_log_likelihood < self.previous:
            self.decreases += 1
        self.previous = dev_log_likelihood
        if self.decreases >= 2:
            return False
        if self.decreases >= 1:
            self.learning_rate /= 2.0
        return True


@dataclass
class TrainingResult:
    params: ParameterSet
    log: pd.DataFrame
    learning_rate: float
    epochs: int = 0
    unknown_relations: int = 0
    grid: Dict[float, float] = field(default_factory=dict)


class Trainer:
    """
    Trains the parser network on a corpus split by minimising the negative log
    of the joint headword / relation probability, one Adam step per sentence.
    """

    def __init__(self, config: TrainConfig, vocabulary: Vocabulary, channels: Sequence[str]) -> None:
        self.config = config
        self.vocabulary = vocabulary
        self.channels = list(channels)
        self.network = ParserNetwork(config.network_options(self.channels))
        self.unknown_relations = 0

    @classmethod
    def for_corpus(cls, config: TrainConfig, train_sentences: Sequence[Sentence]) -> "Trainer":
        channels = config.resolve_channels(train_sentences)
        vocabulary = build_vocab(train_sentences, channels)
        return cls(config, vocabulary, channels)

    def shapes(self, embedding_dim: int) -> Dict[str, Tuple[int, ...]]:
        sizes = {channel: self.vocabulary.size(channel) for channel in self.channels}
        return model_shapes(sizes, self.vocabulary.relation_count, self.config.hidden_size, embedding_dim)

    def initial_params(self, embedding_dim: int) -> ParameterSet:
        return init_params(self.shapes(embedding_dim), self.config.seed, self.config.init_std)

    def _gold(self, sentence: Sentence, count: bool = False) -> Tuple[List[int], List[int]]:
        rels = []
        for label in sentence.rels:
            rel = self.vocabulary.relation_id(label)
            if rel == Vocabulary.UNK_ID:
                self.unknown_relations += int(count)
            rels.append(rel)
        return sentence.heads, rels

    def loss_and_gradients(self, params: ParameterSet, sentence: Sentence) -> Tuple[float, Dict[str, np.ndarray]]:
        graph = Graph()
        outputs = self.network.forward(params, self.vocabulary.encode(sentence), graph)
        heads, rels = self._gold(sentence, count=True)
        loss = sentence_loss(graph, outputs, heads, rels)
        return float(loss.value[0]), graph.gradients(loss)

    def log_likelihood(self, params: ParameterSet, sentences: Sequence[Sentence]) -> float:
        """Sum over sentences of the gold-tree log-likelihood, accumulated in corpus order."""
        total = 0.0
        for sentence in sentences:
            graph = Graph()
            outputs = self.network.forward(params, self.vocabulary.encode(sentence), graph)
            heads, rels = self._gold(sentence)
            total -= float(sentence_loss(graph, outputs, heads, rels).value[0])
        return total

    def run_epoch(self, params: ParameterSet, optimizer: AdamOptimizer, sentences: Sequence[Sentence],
                  lr: float, rng: np.random.Generator) -> float:
        """One pass over a freshly shuffled copy of the training data; returns the summed training loss."""
        order = rng.permutation(len(sentences))
        total = 0.0
        for index in tqdm(order, disable=not self.config.progress, ncols=100, desc="Training"):
            loss, grads = self.loss_and_gradients(params, sentences[index])
            optimizer.step(params, grads, lr)
            total += loss
        return total

    def train(self, split: CorpusSplit, params: ParameterSet, learning_rate: Optional[float] = None) -> TrainingResult:
        """
        Train until the dev log-likelihood drops for the second time or max_epochs is reached.

        Args:
            split (CorpusSplit): Training and dev sentences.
            params (ParameterSet): Initial parameters, updated in place.
            learning_rate (Optional[float]): Initial rate; the config's by default.

        Returns:
            TrainingResult: Parameters of the best dev epoch and the per-epoch log.

        Raises:
            ValueError: If train or dev is empty.
            TrainingDivergedError: If the dev log-likelihood becomes NaN.
        """
        if not split.train or not split.dev:
            raise ValueError(f"Error: need non-empty train and dev sets, got {len(split.train)} / {len(split.dev)}")
        lr = learning_rate or self.config.learning_rate
        schedule = LearningRateSchedule(lr)
        optimizer = AdamOptimizer(self.config.adam_beta1, self.config.adam_beta2, self.config.adam_epsilon)
        rng = np.random.default_rng(self.config.seed)
        records = []
        best_params, best_ll = params.copy(), -math.inf
        epoch = 0
        for epoch in range(1, self.config.max_epochs + 1):
            current_lr = schedule.learning_rate
            started = time.perf_counter()
            self.unknown_relations = 0
            train_loss = self.run_epoch(params, optimizer, split.train, current_lr, rng)
            dev_ll = self.log_likelihood(params, split.dev)
            seconds = time.perf_counter() - started
            records.append({"epoch": epoch, "dev_log_likelihood": dev_ll, "learning_rate": current_lr,
                            "train_loss": train_loss, "seconds": round(seconds, 3)})
            logger.info(f"Epoch {epoch}: dev log-likelihood {dev_ll:.4f}, learning rate {current_lr:g}, {seconds:.1f}s")
            if math.isnan(dev_ll):
                logger.error(f"Error: dev log-likelihood is NaN after epoch {epoch}")
                raise TrainingDivergedError(f"dev log-likelihood became NaN after epoch {epoch}")
            if dev_ll > best_ll:
                best_params, best_ll = params.copy(), dev_ll
            if not schedule.update(dev_ll):
                logger.info(f"Dev log-likelihood decreased twice; stopping after epoch {epoch}")
                break
        if self.unknown_relations:
            logger.warning(f"{self.unknown_relations} gold relations were outside the relation vocabulary")
        return TrainingResult(params=best_params, log=pd.DataFrame.from_records(records), learning_rate=lr,
                              epochs=epoch, unknown_relations=self.unknown_relations)

    def lr_grid_search(self, split: CorpusSplit, initial: ParameterSet, grid: Sequence[float]) -> Tuple[float, Dict[float, float]]:
        """
        Pick the initial learning rate whose first epoch gives the best dev log-likelihood.

        Every candidate starts from a copy of the same initial parameters and the
        same shuffling seed. Ties go to the smaller rate.

        Returns:
            Tuple[float, Dict[float, float]]: Chosen rate and dev log-likelihood per candidate.
        """
        if not grid:
            raise ValueError("Error: learning-rate grid is empty")
        scores: Dict[float, float] = {}
        best_lr, best_ll = None, -math.inf
        for lr in sorted(grid):
            params = initial.copy()
            optimizer = AdamOptimizer(self.config.adam_beta1, self.config.adam_beta2, self.config.adam_epsilon)
            try:
                self.run_epoch(params, optimizer, split.train, lr, np.random.default_rng(self.config.seed))
                dev_ll = self.log_likelihood(params, split.dev)
            except (FloatingPointError, ValueError) as error:
                logger.warning(f"Learning rate {lr:g} failed during the grid search: {error}")
                dev_ll = -math.inf
            if math.isnan(dev_ll):
                dev_ll = -math.inf
            scores[lr] = dev_ll
            logger.info(f"Grid search: learning rate {lr:g} -> dev log-likelihood {dev_ll:.4f}")
            if best_lr is None or dev_ll > best_ll:
                best_lr, best_ll = lr, dev_ll
        logger.info(f"Chosen initial learning rate {best_lr:g}")
        return best_lr, scores
