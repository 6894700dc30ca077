import logging
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

LREL_SLOPE = 0.1
PROBABILITY_FLOOR = 1e-300


class DimensionError(ValueError):
    """Raised when operand shapes do not fit together."""


class ContractError(ValueError):
    """Raised when an operation is called outside its contract."""


def lrel(x: np.ndarray) -> np.ndarray:
    """
    Leaky rectified linear activation with slope 0.1 on the negative part.

    Args:
        x (np.ndarray): Input values.

    Returns:
        np.ndarray: x where x >= 0, 0.1 * x elsewhere.
    """
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, x, LREL_SLOPE * x)


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(x)
    positive = x >= 0.0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    exp_x = np.exp(x[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return out


def softmax(s: np.ndarray) -> np.ndarray:
    """
    Max-shifted softmax over a vector.

    Args:
        s (np.ndarray): Scores, one dimension.

    Returns:
        np.ndarray: Probabilities summing to one.

    Raises:
        DimensionError: If the vector is empty.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DimensionError(f"softmax needs a non-empty vector, got shape {s.shape}")
    shifted = np.exp(s - np.max(s))
    return shifted / np.sum(shifted)


class Node:
    """
    One recorded value in a computation graph.

    The value is computed eagerly when the node is created; the adjoint is filled
    in by Graph.backward.
    """

    __slots__ = ("op", "inputs", "value", "adjoint", "name", "_backward")

    def __init__(self, op: str, inputs: Sequence["Node"], value: np.ndarray,
                 backward: Optional[Callable[[np.ndarray], None]] = None, name: Optional[str] = None) -> None:
        self.op = op
        self.inputs = tuple(inputs)
        self.value = value
        self.adjoint: Optional[np.ndarray] = None
        self.name = name
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def accumulate(self, grad: np.ndarray) -> None:
        if self.adjoint is None:
            self.adjoint = np.zeros_like(self.value)
        self.adjoint += grad

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"Node({self.op}{label}, shape={self.value.shape})"


class Graph:
    """
    Define-by-run tape for reverse-mode differentiation.

    Nodes are appended in creation order, which is a topological order, so the
    backward pass walks the tape in reverse. A graph is built per sentence and is
    confined to the thread that built it.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self.counters: Counter = Counter()

    def _record(self, op: str, inputs: Sequence[Node], value: np.ndarray,
                backward: Optional[Callable[[np.ndarray], None]] = None) -> Node:
        node = Node(op, inputs, value, backward)
        self.nodes.append(node)
        return node

    @staticmethod
    def _same_shape(op: str, a: Node, b: Node) -> None:
        if a.value.shape != b.value.shape:
            raise DimensionError(f"{op}: shape {a.value.shape} does not match shape {b.value.shape}")

    # leaves

    def input(self, value, name: Optional[str] = None) -> Node:
        """
        Record a leaf (parameter or constant).

        Args:
            value: Array-like of finite reals.
            name (Optional[str]): Key under which gradients are reported.

        Returns:
            Node: The leaf node.
        """
        array = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise ContractError(f"input {name or ''} contains non-finite entries")
        node = Node("input", (), array, None, name)
        self.nodes.append(node)
        return node

    def zeros(self, dim: int) -> Node:
        return self.input(np.zeros(dim))

    # linear algebra

    def matvec(self, matrix: Node, x: Node) -> Node:
        if matrix.value.ndim != 2 or x.value.ndim != 1 or matrix.value.shape[1] != x.value.shape[0]:
            raise DimensionError(f"matvec: matrix shape {matrix.value.shape} does not fit vector shape {x.value.shape}")

        def backward(grad: np.ndarray) -> None:
            matrix.accumulate(np.outer(grad, x.value))
            x.accumulate(matrix.value.T @ grad)

        return self._record("matvec", (matrix, x), matrix.value @ x.value, backward)

    def column(self, matrix: Node, index: int) -> Node:
        """Select one column of a matrix; the one-hot product E·e without the product."""
        if matrix.value.ndim != 2:
            raise DimensionError(f"column: expected a matrix, got shape {matrix.value.shape}")
        if not 0 <= index < matrix.value.shape[1]:
            raise ContractError(f"column: index {index} out of range for shape {matrix.value.shape}")

        def backward(grad: np.ndarray) -> None:
            if matrix.adjoint is None:
                matrix.adjoint = np.zeros_like(matrix.value)
            matrix.adjoint[:, index] += grad

        return self._record("column", (matrix,), matrix.value[:, index].copy(), backward)

    def add(self, *terms: Node) -> Node:
        if not terms:
            raise ContractError("add needs at least one operand")
        for term in terms[1:]:
            self._same_shape("add", terms[0], term)

        def backward(grad: np.ndarray) -> None:
            for term in terms:
                term.accumulate(grad)

        value = terms[0].value.copy()
        for term in terms[1:]:
            value = value + term.value
        return self._record("add", terms, value, backward)

    def sub(self, a: Node, b: Node) -> Node:
        self._same_shape("sub", a, b)

        def backward(grad: np.ndarray) -> None:
            a.accumulate(grad)
            b.accumulate(-grad)

        return self._record("sub", (a, b), a.value - b.value, backward)

    def hadamard(self, a: Node, b: Node) -> Node:
        self._same_shape("hadamard", a, b)

        def backward(grad: np.ndarray) -> None:
            a.accumulate(grad * b.value)
            b.accumulate(grad * a.value)

        return self._record("hadamard", (a, b), a.value * b.value, backward)

    def concat(self, *parts: Node) -> Node:
        for part in parts:
            if part.value.ndim != 1:
                raise DimensionError(f"concat: expected vectors, got shape {part.value.shape}")
        sizes = [part.value.shape[0] for part in parts]

        def backward(grad: np.ndarray) -> None:
            offset = 0
            for part, size in zip(parts, sizes):
                part.accumulate(grad[offset:offset + size])
                offset += size

        return self._record("concat", parts, np.concatenate([part.value for part in parts]), backward)

    def dot(self, a: Node, b: Node) -> Node:
        self._same_shape("dot", a, b)

        def backward(grad: np.ndarray) -> None:
            a.accumulate(grad[0] * b.value)
            b.accumulate(grad[0] * a.value)

        return self._record("dot", (a, b), np.array([a.value @ b.value]), backward)

    # activations

    def lrel(self, x: Node) -> Node:
        def backward(grad: np.ndarray) -> None:
            x.accumulate(np.where(x.value >= 0.0, grad, LREL_SLOPE * grad))

        return self._record("lrel", (x,), lrel(x.value), backward)

    def sigmoid(self, x: Node) -> Node:
        out = sigmoid(x.value)

        def backward(grad: np.ndarray) -> None:
            x.accumulate(grad * out * (1.0 - out))

        return self._record("sigmoid", (x,), out, backward)

    def tanh(self, x: Node) -> Node:
        out = np.tanh(x.value)

        def backward(grad: np.ndarray) -> None:
            x.accumulate(grad * (1.0 - out * out))

        return self._record("tanh", (x,), out, backward)

    def softmax(self, x: Node) -> Node:
        out = softmax(x.value)

        def backward(grad: np.ndarray) -> None:
            x.accumulate(out * (grad - out @ grad))

        return self._record("softmax", (x,), out, backward)

    # attention helpers

    def weighted_sum(self, weights: Node, vectors: Sequence[Node], offset: int = 0) -> Node:
        """
        Sum of vectors[k] scaled by weights[offset + k].

        Args:
            weights (Node): Weight vector.
            vectors (Sequence[Node]): Equal-shaped vectors.
            offset (int): Index of the weight paired with vectors[0].

        Returns:
            Node: The weighted sum.
        """
        if not vectors:
            raise ContractError("weighted_sum needs at least one vector")
        if weights.value.ndim != 1 or weights.value.shape[0] != offset + len(vectors):
            raise DimensionError(
                f"weighted_sum: weights shape {weights.value.shape} does not fit {len(vectors)} vectors at offset {offset}")
        for vector in vectors[1:]:
            self._same_shape("weighted_sum", vectors[0], vector)
        stacked = np.stack([vector.value for vector in vectors])
        used = weights.value[offset:]

        def backward(grad: np.ndarray) -> None:
            weight_grad = np.zeros_like(weights.value)
            weight_grad[offset:] = stacked @ grad
            weights.accumulate(weight_grad)
            for k, vector in enumerate(vectors):
                vector.accumulate(used[k] * grad)

        return self._record("weighted-sum", (weights, *vectors), used @ stacked, backward)

    def pick_log(self, probabilities: Node, index: int) -> Node:
        """
        Negative log of one probability entry, the per-prediction cross-entropy term.

        The gradient -1/p reaches the selected entry only.
        """
        if not 0 <= index < probabilities.value.shape[0]:
            raise ContractError(f"pick_log: index {index} out of range for shape {probabilities.value.shape}")
        p = max(probabilities.value[index], PROBABILITY_FLOOR)

        def backward(grad: np.ndarray) -> None:
            local = np.zeros_like(probabilities.value)
            local[index] = -grad[0] / p
            probabilities.accumulate(local)

        return self._record("pick-log", (probabilities,), np.array([-np.log(p)]), backward)

    # reverse pass

    def backward(self, root: Node) -> Dict[Node, np.ndarray]:
        """
        Propagate d(root)/d(node) through the tape.

        Args:
            root (Node): Scalar-valued node, normally the loss.

        Returns:
            Dict[Node, np.ndarray]: Adjoint of every input node reached from root.

        Raises:
            ContractError: If root is not scalar-valued.
        """
        if root.value.size != 1:
            raise ContractError(f"backward needs a scalar root, got shape {root.value.shape}")
        for node in self.nodes:
            node.adjoint = None
        root.adjoint = np.ones_like(root.value)
        for node in reversed(self.nodes):
            if node.adjoint is not None and node._backward is not None:
                node._backward(node.adjoint)
        return {node: node.adjoint for node in self.nodes if node.op == "input" and node.adjoint is not None}

    def gradients(self, root: Node) -> Dict[str, np.ndarray]:
        """Run backward and key the adjoints of named leaves by their name."""
        grads: Dict[str, np.ndarray] = {}
        for node, adjoint in self.backward(root).items():
            if node.name is None:
                continue
            if node.name in grads:
                grads[node.name] = grads[node.name] + adjoint
            else:
                grads[node.name] = adjoint
        return grads
