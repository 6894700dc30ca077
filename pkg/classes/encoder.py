import logging
from typing import List, Mapping, Sequence

from classes.numerics import Graph, Node

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def gru_step(graph: Graph, nodes: Mapping[str, Node], prefix: str, h_prev: Node, x: Node) -> Node:
    """
    One GRU step with the candidate nonlinearity replaced by LReL.

    z = sigmoid(W_z x + U_z h + b_z)
    r = sigmoid(W_r x + U_r h + b_r)
    c = LReL(W_h x + U_h (r * h) + b_h)
    h' = (1 - z) * h + z * c

    Args:
        graph (Graph): Graph for the current sentence.
        nodes (Mapping[str, Node]): Bound parameters.
        prefix (str): Name prefix of the cell, e.g. "memory.left".
        h_prev (Node): Previous hidden state.
        x (Node): Current input.

    Returns:
        Node: New hidden state.
    """
    def affine(gate: str, hidden: Node) -> Node:
        return graph.add(
            graph.matvec(nodes[f"{prefix}.W_{gate}"], x),
            graph.matvec(nodes[f"{prefix}.U_{gate}"], hidden),
            nodes[f"{prefix}.b_{gate}"],
        )

    z = graph.sigmoid(affine("z", h_prev))
    r = graph.sigmoid(affine("r", h_prev))
    candidate = graph.lrel(affine("h", graph.hadamard(r, h_prev)))
    # (1 - z) * h + z * c, written as h + z * (c - h)
    return graph.add(h_prev, graph.hadamard(z, graph.sub(candidate, h_prev)))


def run_gru(graph: Graph, nodes: Mapping[str, Node], prefix: str, inputs: Sequence[Node],
            reverse: bool = False) -> List[Node]:
    """
    Scan a GRU over a sequence starting from a zero state.

    Args:
        reverse (bool): Scan from the last input to the first.

    Returns:
        List[Node]: Hidden states aligned with inputs (index j holds the state after x_j).
    """
    hidden_dim = nodes[f"{prefix}.b_z"].value.shape[0]
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    states: List[Node] = [None] * len(inputs)
    h = graph.zeros(hidden_dim)
    for j in order:
        h = gru_step(graph, nodes, prefix, h, inputs[j])
        states[j] = h
    return states


def encode_memory(graph: Graph, nodes: Mapping[str, Node], embeddings: Sequence[Node]) -> List[Node]:
    """
    Headword embeddings m_0 ... m_n from the bidirectional memory RNN.

    Args:
        graph (Graph): Graph for the current sentence.
        nodes (Mapping[str, Node]): Bound parameters (memory.left.*, memory.right.*).
        embeddings (Sequence[Node]): x_0 ... x_n with x_0 the ROOT embedding.

    Returns:
        List[Node]: m_j = [h^l_j; h^r_j], each of size 2d.
    """
    left = run_gru(graph, nodes, "memory.left", embeddings)
    right = run_gru(graph, nodes, "memory.right", embeddings, reverse=True)
    return [graph.concat(h_left, h_right) for h_left, h_right in zip(left, right)]
