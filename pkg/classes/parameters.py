import logging
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from classes.numerics import Graph, Node

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

GRU_WEIGHTS = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")
DIRECTIONS = ("left", "right")


def gru_shapes(prefix: str, input_dim: int, hidden_dim: int) -> Dict[str, Tuple[int, ...]]:
    shapes: Dict[str, Tuple[int, ...]] = {}
    for gate in ("z", "r", "h"):
        shapes[f"{prefix}.W_{gate}"] = (hidden_dim, input_dim)
        shapes[f"{prefix}.U_{gate}"] = (hidden_dim, hidden_dim)
        shapes[f"{prefix}.b_{gate}"] = (hidden_dim,)
    return shapes


def model_shapes(vocab_sizes: Dict[str, int], relation_count: int, hidden_size: int,
                 embedding_dim: int) -> Dict[str, Tuple[int, ...]]:
    """
    Named tensor shapes of the full parser.

    Args:
        vocab_sizes (Dict[str, int]): Vocabulary size per active channel.
        relation_count (int): Number of relation labels m.
        hidden_size (int): d; memory vectors have e = 2d, attention size h = d.
        embedding_dim (int): p_add, first dimension of every embedding table.

    Returns:
        Dict[str, Tuple[int, ...]]: Shape per parameter name, in a fixed order.
    """
    d = hidden_size
    e = 2 * d
    shapes: Dict[str, Tuple[int, ...]] = {}
    for channel, size in vocab_sizes.items():
        shapes[f"embed.{channel}"] = (embedding_dim, size)
    shapes["proj.P"] = (d, embedding_dim)
    shapes["proj.b"] = (d,)
    for direction in DIRECTIONS:
        shapes.update(gru_shapes(f"memory.{direction}", d, d))
    for direction in DIRECTIONS:
        shapes.update(gru_shapes(f"query.{direction}.gru", e + d, d))
        shapes[f"query.{direction}.C"] = (d, e)
        shapes[f"query.{direction}.D"] = (d, d)
        shapes[f"query.{direction}.v"] = (d,)
    shapes["relation.U"] = (relation_count, 2 * e)
    shapes["relation.W"] = (relation_count, 2 * d)
    shapes["relation.b"] = (relation_count,)
    return shapes


def is_bias(name: str) -> bool:
    last = name.rsplit(".", 1)[-1]
    return last == "b" or last.startswith("b_")


class ParameterSet:
    """
    Ordered collection of named float64 tensors.

    Arrays are updated in place by the optimizer on the training thread and read
    without copying during parsing.
    """

    def __init__(self, tensors: Dict[str, np.ndarray]) -> None:
        self.tensors: Dict[str, np.ndarray] = {name: np.asarray(value, dtype=np.float64) for name, value in tensors.items()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.tensors[name] = np.asarray(value, dtype=np.float64)

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def names(self, prefix: str = "") -> List[str]:
        return [name for name in self.tensors if name.startswith(prefix)]

    def copy(self) -> "ParameterSet":
        return ParameterSet({name: value.copy() for name, value in self.tensors.items()})

    def bind(self, graph: Graph, names: Sequence[str] = ()) -> Dict[str, Node]:
        """
        Record the tensors as named leaves of a graph.

        Args:
            graph (Graph): Graph for one sentence.
            names (Sequence[str]): Subset to bind; all when empty.

        Returns:
            Dict[str, Node]: Leaf per parameter name.
        """
        selected = names or list(self.tensors)
        return {name: graph.input(self.tensors[name], name=name) for name in selected}

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self.tensors.values()))
