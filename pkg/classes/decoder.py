import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from classes.numerics import PROBABILITY_FLOOR

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


@dataclass
class ParseTree:
    """Predicted head (0 = ROOT) and relation label for tokens 1 ... n."""
    heads: List[int]
    rels: List[str]

    @property
    def n(self) -> int:
        return len(self.heads)


def combine_scores(a_left: Optional[np.ndarray], a_right: Optional[np.ndarray]) -> np.ndarray:
    """
    Arc scores log a^l_{t,j} + log a^r_{t,j}.

    Args:
        a_left (Optional[np.ndarray]): n x (n + 1) probabilities, or None for a right-only model.
        a_right (Optional[np.ndarray]): n x (n + 1) probabilities, or None for a left-only model.

    Returns:
        np.ndarray: Scores of shape n x (n + 1); row t - 1 holds token t, self-arcs are -inf.
    """
    present = [a for a in (a_left, a_right) if a is not None]
    if not present:
        raise ValueError("Error: at least one attention matrix is required")
    shape = present[0].shape
    scores = np.zeros(shape, dtype=np.float64)
    clamped = 0
    for a in present:
        if a.shape != shape:
            raise ValueError(f"Error: attention shapes {a_left.shape} and {a_right.shape} differ")
        clamped += int(np.count_nonzero(a < PROBABILITY_FLOOR))
        scores += np.log(np.maximum(a, PROBABILITY_FLOOR))
    if clamped:
        logger.warning(f"Clamped {clamped} attention probabilities to {PROBABILITY_FLOOR} before taking logs")
    n = shape[0]
    scores[np.arange(n), np.arange(1, n + 1)] = -np.inf
    return scores


def greedy_decode(scores: np.ndarray) -> List[int]:
    """
    Best head per token; may produce cycles. Ties go to the smallest head index.
    """
    return [int(j) for j in np.argmax(scores, axis=1)]


def tree_score(scores: np.ndarray, heads: Sequence[int]) -> float:
    return float(sum(scores[t - 1, head] for t, head in enumerate(heads, start=1)))


def _find_cycle(heads: np.ndarray) -> Optional[np.ndarray]:
    """Boolean mask of one cycle in a head array over nodes 0 ... n (node 0 ignored), or None."""
    n_nodes = len(heads)
    state = np.zeros(n_nodes, dtype=np.int8)  # 0 unseen, 1 on path, 2 done
    state[0] = 2
    for start in range(1, n_nodes):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node]
        if state[node] == 1:
            mask = np.zeros(n_nodes, dtype=bool)
            mask[path[path.index(node):]] = True
            return mask
        for visited in path:
            state[visited] = 2
    return None


def _chu_liu_edmonds(scores: np.ndarray) -> np.ndarray:
    """
    Maximum spanning arborescence on a dense (n + 1) x (n + 1) matrix.

    scores[dep, head]; row 0 belongs to ROOT and is ignored. Each contraction
    step picks the best head per node, contracts one cycle into a single node
    with adjusted entering scores and recurses.
    """
    scores = scores.copy()
    np.fill_diagonal(scores, -np.inf)
    scores[0] = -np.inf
    scores[0, 0] = 0.0
    heads = np.argmax(scores, axis=1)
    cycle = _find_cycle(heads)
    if cycle is None:
        return heads

    cycle_locs = np.where(cycle)[0]
    noncycle = ~cycle
    noncycle_locs = np.where(noncycle)[0]
    cycle_arc_scores = scores[cycle_locs, heads[cycle_locs]]
    cycle_total = cycle_arc_scores.sum()

    # entering the cycle at cycle node i from outside head k
    entering = scores[cycle][:, noncycle] - cycle_arc_scores[:, None] + cycle_total
    best_entry = np.argmax(entering, axis=0)
    # leaving the cycle: outside dependent k headed by cycle node i
    leaving = scores[noncycle][:, cycle]
    best_exit = np.argmax(leaving, axis=1)

    size = len(noncycle_locs)
    contracted = np.full((size + 1, size + 1), -np.inf)
    contracted[:size, :size] = scores[noncycle][:, noncycle]
    contracted[size, :size] = entering[best_entry, np.arange(size)]
    contracted[:size, size] = leaving[np.arange(size), best_exit]

    contracted_heads = _chu_liu_edmonds(contracted)

    new_heads = np.full_like(heads, -1)
    inside = contracted_heads[:size] < size
    new_heads[noncycle_locs[inside]] = noncycle_locs[contracted_heads[:size][inside]]
    outside = ~inside
    new_heads[noncycle_locs[outside]] = cycle_locs[best_exit[outside]]
    new_heads[cycle_locs] = heads[cycle_locs]
    cycle_head = contracted_heads[size]
    new_heads[cycle_locs[best_entry[cycle_head]]] = noncycle_locs[cycle_head]
    return new_heads


def _square(scores: np.ndarray) -> np.ndarray:
    n = scores.shape[0]
    square = np.full((n + 1, n + 1), -np.inf)
    square[1:, :] = scores
    return square


def mst_decode(scores: np.ndarray, single_root: bool = False) -> List[int]:
    """
    Highest-scoring spanning arborescence rooted at ROOT (Chu-Liu-Edmonds).

    Args:
        scores (np.ndarray): n x (n + 1) arc scores, row t - 1 for token t.
        single_root (bool): Require exactly one child of ROOT; the search is run
            once per candidate root child and the best tree kept.

    Returns:
        List[int]: heads[t - 1] for t = 1 ... n.
    """
    n = scores.shape[0]
    if n == 0:
        return []
    square = _square(scores)
    if not single_root or n == 1:
        return [int(h) for h in _chu_liu_edmonds(square)[1:]]

    best_heads, best_total = None, -np.inf
    for child in range(1, n + 1):
        restricted = square.copy()
        restricted[1:, 0] = -np.inf
        restricted[child, 0] = square[child, 0]
        heads = [int(h) for h in _chu_liu_edmonds(restricted)[1:]]
        total = tree_score(scores, heads)
        if total > best_total:
            best_heads, best_total = heads, total
    return best_heads


def label_arcs(heads: Sequence[int], y: np.ndarray) -> List[int]:
    """
    Relation id per token, the argmax of its relation distribution (ties to the smallest id).

    Args:
        heads (Sequence[int]): Decoded heads; one label per head.
        y (np.ndarray): n x m relation probabilities.

    Returns:
        List[int]: Relation ids.
    """
    if len(heads) != y.shape[0]:
        raise ValueError(f"Error: {len(heads)} heads but {y.shape[0]} relation rows")
    return [int(r) for r in np.argmax(y, axis=1)]
