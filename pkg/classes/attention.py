import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

import numpy as np

from classes.encoder import gru_step
from classes.numerics import Graph, Node

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SCORE_COUNTER = "attention_scores"


@dataclass
class QueryStep:
    """Query state, headword distribution and soft headword embedding at one position."""
    q: Node
    a: Node
    soft: Node


@dataclass
class AttentionRecord:
    """
    Per-sentence attention values.

    a_left / a_right have shape n x (n + 1); row t - 1 is the headword
    distribution of token t. A direction that is switched off is None.
    """
    a_left: Optional[np.ndarray]
    a_right: Optional[np.ndarray]
    q_left: Optional[np.ndarray]
    q_right: Optional[np.ndarray]
    soft_left: Optional[np.ndarray]
    soft_right: Optional[np.ndarray]
    y: np.ndarray

    @staticmethod
    def _stack(steps: Optional[Sequence[QueryStep]], field: str) -> Optional[np.ndarray]:
        if steps is None:
            return None
        return np.stack([getattr(step, field).value for step in steps])

    @classmethod
    def from_steps(cls, left: Optional[Sequence[QueryStep]], right: Optional[Sequence[QueryStep]],
                   relations: Sequence[Node]) -> "AttentionRecord":
        return cls(
            a_left=cls._stack(left, "a"),
            a_right=cls._stack(right, "a"),
            q_left=cls._stack(left, "q"),
            q_right=cls._stack(right, "q"),
            soft_left=cls._stack(left, "soft"),
            soft_right=cls._stack(right, "soft"),
            y=np.stack([node.value for node in relations]),
        )


def project_memory(graph: Graph, nodes: Mapping[str, Node], prefix: str, memory: Sequence[Node]) -> List[Node]:
    """C · m_j for every memory slot; shared by all query steps of one direction."""
    return [graph.matvec(nodes[f"{prefix}.C"], m) for m in memory]


def attend(graph: Graph, nodes: Mapping[str, Node], prefix: str, q_t: Node, memory: Sequence[Node],
           projected: Optional[Sequence[Node]] = None) -> Node:
    """
    Headword distribution of one query vector.

    s_{t,j} = v · tanh(C m_j + D q_t) for j = 0 ... n, then softmax over j.

    Args:
        graph (Graph): Graph for the current sentence.
        nodes (Mapping[str, Node]): Bound parameters.
        prefix (str): "query.left" or "query.right".
        q_t (Node): Query vector.
        memory (Sequence[Node]): m_0 ... m_n.
        projected (Optional[Sequence[Node]]): Precomputed C m_j.

    Returns:
        Node: Probabilities over the n + 1 headwords.
    """
    if projected is None:
        projected = project_memory(graph, nodes, prefix, memory)
    query = graph.matvec(nodes[f"{prefix}.D"], q_t)
    v = nodes[f"{prefix}.v"]
    scores = []
    for cm in projected:
        scores.append(graph.dot(v, graph.tanh(graph.add(cm, query))))
        graph.counters[SCORE_COUNTER] += 1
    return graph.softmax(graph.concat(*scores))


def soft_head(graph: Graph, a_t: Node, memory: Sequence[Node], include_root: bool = True) -> Node:
    """
    Attention-weighted sum of memory vectors.

    With include_root off the sum starts at m_1 and the ROOT weight is dropped.
    For a one-token sentence that leaves nothing to sum, so ROOT is kept.
    """
    if include_root or len(memory) == 1:
        return graph.weighted_sum(a_t, memory)
    return graph.weighted_sum(a_t, memory[1:], offset=1)


def _run_query(graph: Graph, nodes: Mapping[str, Node], prefix: str, memory: Sequence[Node],
               embeddings: Sequence[Node], positions: Sequence[int], feed_soft_head: bool,
               include_root: bool) -> List[QueryStep]:
    hidden_dim = nodes[f"{prefix}.v"].value.shape[0]
    memory_dim = memory[0].value.shape[0]
    projected = project_memory(graph, nodes, prefix, memory)
    zero_soft = graph.zeros(memory_dim)
    q = graph.zeros(hidden_dim)
    soft = zero_soft
    steps = {}
    for t in positions:
        feed = soft if feed_soft_head else zero_soft
        q = gru_step(graph, nodes, f"{prefix}.gru", q, graph.concat(feed, embeddings[t]))
        a = attend(graph, nodes, prefix, q, memory, projected)
        soft = soft_head(graph, a, memory, include_root)
        steps[t] = QueryStep(q=q, a=a, soft=soft)
    return [steps[t] for t in sorted(steps)]


def run_query_forward(graph: Graph, nodes: Mapping[str, Node], memory: Sequence[Node],
                      embeddings: Sequence[Node], feed_soft_head: bool = True,
                      include_root: bool = True) -> List[QueryStep]:
    """
    Left-to-right query component over t = 1 ... n.

    The GRU input at t is [soft_{t-1}; x_t] with soft_0 = 0, or [0; x_t] when
    feed_soft_head is off.

    Args:
        embeddings (Sequence[Node]): x_0 ... x_n; x_0 is not queried.

    Returns:
        List[QueryStep]: Steps for t = 1 ... n in position order.
    """
    n = len(embeddings) - 1
    return _run_query(graph, nodes, "query.left", memory, embeddings, range(1, n + 1),
                      feed_soft_head, include_root)


def run_query_backward(graph: Graph, nodes: Mapping[str, Node], memory: Sequence[Node],
                       embeddings: Sequence[Node], feed_soft_head: bool = True,
                       include_root: bool = True) -> List[QueryStep]:
    """Right-to-left mirror of run_query_forward: t = n ... 1 with soft_{n+1} = 0; returned in position order."""
    n = len(embeddings) - 1
    return _run_query(graph, nodes, "query.right", memory, embeddings, range(n, 0, -1),
                      feed_soft_head, include_root)


def predict_relation(graph: Graph, nodes: Mapping[str, Node], soft_left: Node, soft_right: Node,
                     q_left: Node, q_right: Node) -> Node:
    """
    Relation distribution y_t = softmax(U [soft^l; soft^r] + W [q^l; q^r] + b).

    Returns:
        Node: Probabilities over the m relation labels.
    """
    return graph.softmax(graph.add(
        graph.matvec(nodes["relation.U"], graph.concat(soft_left, soft_right)),
        graph.matvec(nodes["relation.W"], graph.concat(q_left, q_right)),
        nodes["relation.b"],
    ))
