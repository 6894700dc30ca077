import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from classes.attention import AttentionRecord, QueryStep, predict_relation, run_query_backward, run_query_forward
from classes.embedding import TokenIds, embed_sentence
from classes.encoder import encode_memory
from classes.numerics import Graph, Node
from classes.parameters import ParameterSet

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DIRECTION_CHOICES = ("both", "l2r", "r2l")


@dataclass(frozen=True)
class NetworkOptions:
    channels: Sequence[str]
    directions: str = "both"
    feed_soft_head: bool = True
    soft_head_root: bool = True

    @property
    def uses_left(self) -> bool:
        return self.directions in ("both", "l2r")

    @property
    def uses_right(self) -> bool:
        return self.directions in ("both", "r2l")


@dataclass
class SentenceOutputs:
    """Graph nodes produced for one sentence."""
    graph: Graph
    nodes: Dict[str, Node]
    memory: List[Node]
    left: Optional[List[QueryStep]]
    right: Optional[List[QueryStep]]
    relations: List[Node]

    def record(self) -> AttentionRecord:
        return AttentionRecord.from_steps(self.left, self.right, self.relations)


class ParserNetwork:
    """
    The bi-directional attention network: additive token embeddings, memory
    encoder, one or two query components and the relation classifier.
    """

    def __init__(self, options: NetworkOptions) -> None:
        if options.directions not in DIRECTION_CHOICES:
            raise ValueError(f"Error: directions must be one of {', '.join(DIRECTION_CHOICES)}, got '{options.directions}'")
        self.options = options

    def parameter_names(self, params: ParameterSet) -> List[str]:
        """Names the forward pass reads; parameters of a disabled direction are left out."""
        prefixes = [f"embed.{channel}" for channel in self.options.channels]
        prefixes += ["proj.", "memory.", "relation."]
        if self.options.uses_left:
            prefixes.append("query.left.")
        if self.options.uses_right:
            prefixes.append("query.right.")
        return [name for name in params if any(name == p or name.startswith(p) for p in prefixes)]

    def forward(self, params: ParameterSet, sentence_ids: Sequence[TokenIds],
                graph: Optional[Graph] = None) -> SentenceOutputs:
        """
        Run the network over one encoded sentence.

        Args:
            params (ParameterSet): Model tensors.
            sentence_ids (Sequence[TokenIds]): Ids for ROOT followed by the n tokens.
            graph (Optional[Graph]): Graph to record into; a fresh one by default.

        Returns:
            SentenceOutputs: Query steps per direction and relation distributions for t = 1 ... n.
        """
        graph = graph or Graph()
        nodes = params.bind(graph, self.parameter_names(params))
        options = self.options
        embeddings = embed_sentence(graph, nodes, sentence_ids, options.channels)
        memory = encode_memory(graph, nodes, embeddings)

        left = right = None
        if options.uses_left:
            left = run_query_forward(graph, nodes, memory, embeddings, options.feed_soft_head, options.soft_head_root)
        if options.uses_right:
            right = run_query_backward(graph, nodes, memory, embeddings, options.feed_soft_head, options.soft_head_root)

        memory_dim = memory[0].value.shape[0]
        hidden_dim = nodes["memory.left.b_z"].value.shape[0]
        relations = []
        for index in range(len(sentence_ids) - 1):
            soft_l, q_l = (left[index].soft, left[index].q) if left else (graph.zeros(memory_dim), graph.zeros(hidden_dim))
            soft_r, q_r = (right[index].soft, right[index].q) if right else (graph.zeros(memory_dim), graph.zeros(hidden_dim))
            relations.append(predict_relation(graph, nodes, soft_l, soft_r, q_l, q_r))
        return SentenceOutputs(graph=graph, nodes=nodes, memory=memory, left=left, right=right, relations=relations)
