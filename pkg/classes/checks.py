import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from classes.agreement import cross_entropy_identity_check, kl_div, verify_agreement_bound
from classes.attention import SCORE_COUNTER
from classes.corpus import is_tree
from classes.decoder import mst_decode, tree_score
from classes.network import NetworkOptions, ParserNetwork
from classes.numerics import Graph
from classes.parameters import ParameterSet, is_bias, model_shapes
from classes.trainer import init_params, sentence_loss

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

GRADIENT_STEP = 1e-5
GRADIENT_TOLERANCE = 1e-4
IDENTITY_TOLERANCE = 1e-10
NORMALISATION_TOLERANCE = 1e-10

GradientHook = Callable[[Dict[str, np.ndarray]], Dict[str, np.ndarray]]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ToyModel:
    """A small randomly initialised network for numeric property checks."""
    network: ParserNetwork
    params: ParameterSet
    vocab_sizes: Dict[str, int]
    relation_count: int

    def random_sentence(self, rng: np.random.Generator, n: int) -> Tuple[List[Dict[str, int]], List[int], List[int]]:
        """Encoded ROOT + n tokens with a random gold tree (heads of a random recursive tree) and relations."""
        ids = [{channel: 1 for channel in self.vocab_sizes}]
        for _ in range(n):
            ids.append({channel: int(rng.integers(0, size)) for channel, size in self.vocab_sizes.items()})
        order = rng.permutation(n) + 1
        heads = [0] * n
        for k, token in enumerate(order):
            heads[token - 1] = 0 if k == 0 else int(order[rng.integers(0, k)])
        rels = [int(rng.integers(0, self.relation_count)) for _ in range(n)]
        return ids, heads, rels


def toy_model(seed: int, hidden_size: int = 4, relation_count: int = 2, std: float = 0.5,
              options: Optional[NetworkOptions] = None) -> ToyModel:
    vocab_sizes = {"form": 6, "fpos": 4}
    options = options or NetworkOptions(channels=tuple(vocab_sizes))
    shapes = model_shapes(vocab_sizes, relation_count, hidden_size, hidden_size)
    params = init_params(shapes, seed, std)
    # non-zero biases so their gradients are exercised
    rng = np.random.default_rng(seed + 1)
    for name in params:
        if is_bias(name):
            params[name] = rng.normal(0.0, std, size=params[name].shape)
    return ToyModel(ParserNetwork(options), params, vocab_sizes, relation_count)


def random_simplex(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.dirichlet(np.ones(dim))


def agreement_bound_suite(seed: int, trials: int = 1000) -> CheckResult:
    """The Hellinger / KL inequality chain on random simplex triples of dimension 2 to 10."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        dim = int(rng.integers(2, 11))
        report = verify_agreement_bound(random_simplex(rng, dim), random_simplex(rng, dim), random_simplex(rng, dim))
        failures += int(not report.holds)
    return CheckResult("agreement_bound", failures == 0, f"{failures} of {trials} triples violated a link")


def identity_suite(seed: int, trials: int = 1000) -> CheckResult:
    """D(g||p) + D(g||q) against 2 sum g log(g / sqrt(pq)) on random triples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 11))
        left, right = cross_entropy_identity_check(random_simplex(rng, dim), random_simplex(rng, dim),
                                                   random_simplex(rng, dim))
        worst = max(worst, abs(left - right) / max(1.0, abs(left)))
    return CheckResult("cross_entropy_identity", worst <= IDENTITY_TOLERANCE, f"worst relative gap {worst:.3e}")


def loss_decomposition_suite(seed: int, sentences: int = 20) -> CheckResult:
    """The training loss equals the summed KL terms of one-hot gold distributions plus the relation cross-entropy."""
    rng = np.random.default_rng(seed)
    model = toy_model(seed)
    worst = 0.0
    for _ in range(sentences):
        ids, heads, rels = model.random_sentence(rng, int(rng.integers(1, 7)))
        graph = Graph()
        outputs = model.network.forward(model.params, ids, graph)
        loss = float(sentence_loss(graph, outputs, heads, rels).value[0])
        record = outputs.record()
        total = 0.0
        for index, head in enumerate(heads):
            gold = np.zeros(len(ids))
            gold[head] = 1.0
            total += kl_div(gold, record.a_left[index]) + kl_div(gold, record.a_right[index])
            total -= math.log(record.y[index, rels[index]])
        worst = max(worst, abs(loss - total))
    return CheckResult("loss_decomposition", worst <= IDENTITY_TOLERANCE, f"worst gap {worst:.3e}")


def _loss_value(model: ToyModel, ids, heads, rels) -> float:
    graph = Graph()
    outputs = model.network.forward(model.params, ids, graph)
    return float(sentence_loss(graph, outputs, heads, rels).value[0])


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-5)


def gradient_suite(seed: int, tamper: Optional[GradientHook] = None, samples_per_tensor: int = 6) -> CheckResult:
    """
    Analytic gradients of the sentence loss against central differences.

    3-token sentence, 2 relations, d = 4. Each tensor is sampled at a few random
    entries.

    Args:
        seed (int): Seed for the model and the sampled entries.
        tamper (Optional[GradientHook]): Applied to the analytic gradients before comparison.
        samples_per_tensor (int): Entries sampled per tensor.
    """
    rng = np.random.default_rng(seed)
    model = toy_model(seed)
    ids, heads, rels = model.random_sentence(rng, 3)
    graph = Graph()
    outputs = model.network.forward(model.params, ids, graph)
    grads = graph.gradients(sentence_loss(graph, outputs, heads, rels))
    if tamper is not None:
        grads = tamper(grads)

    failed: List[str] = []
    worst = 0.0
    for name in model.network.parameter_names(model.params):
        tensor = model.params[name]
        analytic_tensor = grads.get(name, np.zeros_like(tensor))
        for flat in rng.choice(tensor.size, size=min(samples_per_tensor, tensor.size), replace=False):
            index = np.unravel_index(int(flat), tensor.shape)
            original = tensor[index]
            tensor[index] = original + GRADIENT_STEP
            plus = _loss_value(model, ids, heads, rels)
            tensor[index] = original - GRADIENT_STEP
            minus = _loss_value(model, ids, heads, rels)
            tensor[index] = original
            numeric = (plus - minus) / (2.0 * GRADIENT_STEP)
            error = relative_error(float(analytic_tensor[index]), numeric)
            worst = max(worst, error)
            if error > GRADIENT_TOLERANCE:
                failed.append(name)
                break
    detail = f"worst relative error {worst:.3e}"
    if failed:
        detail += f"; mismatched tensors: {', '.join(failed)}"
    return CheckResult("gradients", not failed, detail)


def brute_force_arborescence(scores: np.ndarray, single_root: bool = False) -> Tuple[float, List[int]]:
    """
    Exhaustive best tree over an n x (n + 1) score matrix by depth-first search
    with cycle pruning and a row-maximum bound.
    """
    n = scores.shape[0]
    row_best = [max(scores[t - 1, h] for h in range(n + 1) if h != t) for t in range(1, n + 1)]
    remaining = np.concatenate([np.cumsum(row_best[::-1])[::-1], [0.0]])
    heads = [0] * (n + 1)
    best: List = [-math.inf, None]

    def closes_cycle(token: int, head: int) -> bool:
        node = head
        while node != 0 and node < token:
            node = heads[node]
        return node == token

    def search(token: int, total: float, root_children: int) -> None:
        if token > n:
            if (not single_root or root_children == 1) and total > best[0]:
                best[0], best[1] = total, heads[1:]
            return
        if total + remaining[token - 1] <= best[0]:
            return
        for head in range(n + 1):
            if head == token or (single_root and head == 0 and root_children == 1):
                continue
            if head != 0 and closes_cycle(token, head):
                continue
            heads[token] = head
            search(token + 1, total + scores[token - 1, head], root_children + int(head == 0))
        heads[token] = 0

    search(1, 0.0, 0)
    return best[0], list(best[1])


def mst_suite(seed: int, instances: int = 200, max_n: int = 6) -> CheckResult:
    """mst_decode against exhaustive search on random dense instances, with and without the single-root rule."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        scores = rng.normal(size=(n, n + 1))
        for single_root in (False, True):
            heads = mst_decode(scores, single_root=single_root)
            optimum, _ = brute_force_arborescence(scores, single_root=single_root)
            valid = is_tree(heads) and (not single_root or heads.count(0) == 1)
            if not valid or abs(tree_score(scores, heads) - optimum) > 1e-9:
                failures += 1
    return CheckResult("mst_optimality", failures == 0, f"{failures} of {2 * instances} decodes off the optimum")


def normalisation_suite(seed: int, sentences: int = 100) -> CheckResult:
    """Every attention row and relation distribution sums to one."""
    rng = np.random.default_rng(seed)
    model = toy_model(seed)
    worst = 0.0
    for _ in range(sentences):
        ids, _, _ = model.random_sentence(rng, int(rng.integers(1, 9)))
        record = model.network.forward(model.params, ids).record()
        for matrix in (record.a_left, record.a_right, record.y):
            worst = max(worst, float(np.max(np.abs(matrix.sum(axis=1) - 1.0))))
    return CheckResult("normalisation", worst <= NORMALISATION_TOLERANCE, f"worst deviation {worst:.3e}")


def score_count_suite(seed: int, lengths: Sequence[int] = (1, 5, 20)) -> CheckResult:
    """Attention score evaluations per sentence are exactly 2 n (n + 1)."""
    rng = np.random.default_rng(seed)
    model = toy_model(seed)
    mismatches = []
    for n in lengths:
        ids, _, _ = model.random_sentence(rng, n)
        graph = Graph()
        model.network.forward(model.params, ids, graph)
        if graph.counters[SCORE_COUNTER] != 2 * n * (n + 1):
            mismatches.append(f"n={n}: {graph.counters[SCORE_COUNTER]}")
    return CheckResult("score_count", not mismatches, "; ".join(mismatches) or "all counts exact")


def run_checks(seed: int = 1, tamper: Optional[GradientHook] = None) -> List[CheckResult]:
    """
    Run every property suite.

    Args:
        seed (int): Seed for all random draws.
        tamper (Optional[GradientHook]): Passed to the gradient suite.

    Returns:
        List[CheckResult]: One result per suite.
    """
    results = [
        agreement_bound_suite(seed),
        identity_suite(seed),
        loss_decomposition_suite(seed),
        gradient_suite(seed, tamper),
        mst_suite(seed),
        normalisation_suite(seed),
        score_count_suite(seed),
    ]
    for result in results:
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"Check {result.name}: {'passed' if result.passed else 'FAILED'} ({result.detail})")
    return results
