import logging
from typing import List, Optional, Sequence

from tqdm import tqdm

from classes.attention import AttentionRecord
from classes.config_loader import train_config_from_echo
from classes.corpus import Sentence, Vocabulary
from classes.decoder import ParseTree, combine_scores, greedy_decode, label_arcs, mst_decode
from classes.model_archive import ModelArchive
from classes.network import NetworkOptions, ParserNetwork
from classes.numerics import Graph
from classes.parameters import ParameterSet

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class DependencyParser:
    """
    Applies a trained model to sentences: forward pass, arc scores from the
    attention of every present direction, tree decoding and relation labels.
    """

    def __init__(self, params: ParameterSet, vocabulary: Vocabulary, options: NetworkOptions,
                 mode: str = "mst", single_root: bool = False) -> None:
        if mode not in ("greedy", "mst"):
            raise ValueError(f"Error: decode mode must be greedy or mst, got '{mode}'")
        self.params = params
        self.vocabulary = vocabulary
        self.network = ParserNetwork(options)
        self.mode = mode
        self.single_root = single_root

    @classmethod
    def from_archive(cls, archive: ModelArchive, mode: Optional[str] = None,
                     single_root: Optional[bool] = None) -> "DependencyParser":
        """Rebuild a parser from an archive's config echo; explicit arguments override it."""
        train = train_config_from_echo(archive.config)
        channels = archive.channels or archive.vocabulary.channels
        return cls(archive.params, archive.vocabulary, train.network_options(channels),
                   mode=mode or archive.config.get("decode.mode", "mst"),
                   single_root=archive.config.get("decode.single_root", False) if single_root is None else single_root)

    def attention(self, sentence: Sentence) -> AttentionRecord:
        """Attention distributions, query states, soft headwords and relation distributions of one sentence."""
        outputs = self.network.forward(self.params, self.vocabulary.encode(sentence), Graph())
        return outputs.record()

    def parse(self, sentence: Sentence) -> ParseTree:
        """
        Predict the dependency tree of one sentence.

        Args:
            sentence (Sentence): Input tokens; gold columns are ignored.

        Returns:
            ParseTree: Heads and relation labels for tokens 1 ... n.
        """
        if sentence.n == 0:
            return ParseTree(heads=[], rels=[])
        record = self.attention(sentence)
        scores = combine_scores(record.a_left, record.a_right)
        if self.mode == "greedy":
            heads = greedy_decode(scores)
        else:
            heads = mst_decode(scores, single_root=self.single_root)
        rels = [self.vocabulary.relation_label(rel) for rel in label_arcs(heads, record.y)]
        return ParseTree(heads=heads, rels=rels)

    def parse_corpus(self, sentences: Sequence[Sentence], progress: bool = False) -> List[ParseTree]:
        trees = [self.parse(sentence) for sentence in tqdm(sentences, disable=not progress, ncols=100, desc="Parsing")]
        logger.info(f"Parsed {len(trees)} sentences ({self.mode} decoding)")
        return trees
