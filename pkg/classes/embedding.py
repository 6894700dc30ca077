import logging
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from classes.corpus import Vocabulary
from classes.numerics import ContractError, Graph, Node

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

TokenIds = Mapping[str, Union[int, List[int]]]


class VectorFormatError(ValueError):
    """Raised for malformed word-vector files."""


def token_embed(graph: Graph, nodes: Mapping[str, Node], ids: TokenIds, channels: Sequence[str]) -> Node:
    """
    Additive token embedding projected into model space.

    x = LReL(P · (sum over active channels of the id's column) + b). The feats
    channel contributes the sum of its atoms' columns.

    Args:
        graph (Graph): Graph for the current sentence.
        nodes (Mapping[str, Node]): Bound parameters (embed.<channel>, proj.P, proj.b).
        ids (TokenIds): Vocabulary ids of the token per channel.
        channels (Sequence[str]): Active channels.

    Returns:
        Node: Token embedding of size d.

    Raises:
        ContractError: If an id lies outside its channel table.
    """
    columns: List[Node] = []
    for channel in channels:
        table = nodes[f"embed.{channel}"]
        channel_ids = ids[channel]
        if isinstance(channel_ids, int):
            channel_ids = [channel_ids]
        for index in channel_ids:
            if not 0 <= index < table.value.shape[1]:
                raise ContractError(f"id {index} out of range for channel '{channel}' of size {table.value.shape[1]}")
            columns.append(graph.column(table, index))
    if not columns:
        additive = graph.zeros(nodes["proj.P"].value.shape[1])
    else:
        additive = graph.add(*columns)
    return graph.lrel(graph.add(graph.matvec(nodes["proj.P"], additive), nodes["proj.b"]))


def embed_sentence(graph: Graph, nodes: Mapping[str, Node], sentence_ids: Sequence[TokenIds],
                   channels: Sequence[str]) -> List[Node]:
    """Embeddings x_0 (ROOT) ... x_n for an encoded sentence."""
    return [token_embed(graph, nodes, ids, channels) for ids in sentence_ids]


def _parse_vector_line(line: str, line_number: int, expected_dim: int):
    parts = line.rstrip().split(" ")
    word, values = parts[0], parts[1:]
    if not word or not values:
        raise VectorFormatError(f"Error: malformed vector line {line_number}")
    if len(values) != expected_dim:
        raise VectorFormatError(
            f"Error: dimension mismatch on line {line_number}: expected {expected_dim}, found {len(values)}")
    try:
        vector = np.array([float(value) for value in values], dtype=np.float64)
    except ValueError as error:
        raise VectorFormatError(f"Error: malformed vector line {line_number}: {error}")
    return word, vector


def load_pretrained(path: str, form_table: np.ndarray, vocabulary: Vocabulary) -> int:
    """
    Overwrite form-table columns with pretrained word vectors.

    The file holds an optional "count dim" header line followed by lines
    "word v_1 ... v_p". Only in-vocabulary words are used; the unknown and ROOT
    columns are never overwritten.

    Args:
        path (str): Text vector file.
        form_table (np.ndarray): embed.form table, p_add x V, modified in place.
        vocabulary (Vocabulary): Vocabulary owning the form channel.

    Returns:
        int: Number of columns overwritten.

    Raises:
        VectorFormatError: On a dimension mismatch or a malformed line.
    """
    expected_dim = form_table.shape[0]
    stoi: Dict[str, int] = vocabulary.stoi["form"]
    reserved = {Vocabulary.UNK_ID, Vocabulary.ROOT_ID}
    overwritten = set()
    skipped = 0
    with open(path, "r", encoding="utf-8") as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            if line_number == 1:
                header = line.split()
                if len(header) == 2 and all(part.isdigit() for part in header):
                    if int(header[1]) != expected_dim:
                        raise VectorFormatError(
                            f"Error: dimension mismatch in header: expected {expected_dim}, found {header[1]}")
                    continue
            word, vector = _parse_vector_line(line, line_number, expected_dim)
            index = stoi.get(word)
            if index is None or index in reserved:
                skipped += 1
                continue
            form_table[:, index] = vector
            overwritten.add(index)
    logger.info(f"Initialised {len(overwritten)} form columns from {path} ({skipped} vectors out of vocabulary)")
    return len(overwritten)
