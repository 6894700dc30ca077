import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Union

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CHANNELS = ("form", "lemma", "cpos", "fpos", "feats")
POS_CHANNELS = ("cpos", "fpos")
UNK = "<unk>"
ROOT = "<root>"
ABSENT = "_"


class CoNLLFormatError(ValueError):
    """Raised for malformed CoNLL-X input; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Token:
    form: str
    lemma: Optional[str]
    cpos: Optional[str]
    fpos: str
    feats: List[str]
    gold_head: int
    gold_rel: str

    def channel(self, name: str) -> Union[None, str, List[str]]:
        return getattr(self, name)


@dataclass(frozen=True)
class Sentence:
    tokens: List[Token]

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def heads(self) -> List[int]:
        return [token.gold_head for token in self.tokens]

    @property
    def rels(self) -> List[str]:
        return [token.gold_rel for token in self.tokens]

    def is_tree(self) -> bool:
        return is_tree(self.heads)


@dataclass
class CorpusSplit:
    train: List[Sentence]
    dev: List[Sentence]
    split_seed: int


def is_tree(heads: Sequence[int]) -> bool:
    """
    Check that a head array forms an arborescence rooted at 0.

    Several children of ROOT are allowed.

    Args:
        heads (Sequence[int]): heads[t - 1] is the head of token t.

    Returns:
        bool: True if every token reaches 0 without revisiting a node.
    """
    n = len(heads)
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 reaches root
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            head = heads[node - 1]
            if not 0 <= head <= n or head == node:
                return False
            node = head
        if state[node] == 1:
            return False
        for visited in path:
            state[visited] = 2
    return True


def _field(value: str) -> Optional[str]:
    return None if value == ABSENT else value


def _parse_sentence(rows: List[List[str]], line_numbers: List[int]) -> Sentence:
    n = len(rows)
    tokens = []
    for position, (columns, line_number) in enumerate(zip(rows, line_numbers), start=1):
        try:
            token_id = int(columns[0])
        except ValueError:
            raise CoNLLFormatError(f"ID '{columns[0]}' is not an integer", line_number)
        if token_id != position:
            raise CoNLLFormatError(f"expected ID {position}, found {token_id}", line_number)
        try:
            head = int(columns[6])
        except ValueError:
            raise CoNLLFormatError(f"HEAD '{columns[6]}' is not an integer", line_number)
        if not 0 <= head <= n or head == position:
            raise CoNLLFormatError(f"HEAD {head} out of range for sentence of length {n}", line_number)
        if not columns[1]:
            raise CoNLLFormatError("empty FORM", line_number)
        tokens.append(Token(
            form=columns[1],
            lemma=_field(columns[2]),
            cpos=_field(columns[3]),
            fpos=columns[4],
            feats=[] if columns[5] == ABSENT else columns[5].split("|"),
            gold_head=head,
            gold_rel=columns[7],
        ))
    return Sentence(tokens)


def read_conll(path: str, require_tree: bool = False) -> List[Sentence]:
    """
    Read a CoNLL-X file.

    Args:
        path (str): UTF-8 file with 10 tab-separated columns per token line and a
            blank line between sentences.
        require_tree (bool): Reject sentences whose heads do not form a tree rooted
            at 0. Set for gold files; predicted files may hold cyclic greedy output.

    Returns:
        List[Sentence]: Sentences in file order.

    Raises:
        CoNLLFormatError: On a wrong column count, non-integer or out-of-range HEAD,
            or non-contiguous IDs, and on cyclic heads when require_tree is set.
    """
    sentences: List[Sentence] = []
    rows: List[List[str]] = []
    line_numbers: List[int] = []

    def close_sentence() -> None:
        sentence = _parse_sentence(rows, line_numbers)
        if require_tree and not sentence.is_tree():
            raise CoNLLFormatError(f"heads {sentence.heads} do not form a tree rooted at 0", line_numbers[0])
        sentences.append(sentence)

    with open(path, "r", encoding="utf-8") as file:
        for line_number, line in enumerate(file, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                if rows:
                    close_sentence()
                    rows, line_numbers = [], []
                continue
            columns = line.split("\t")
            if len(columns) != 10:
                raise CoNLLFormatError(f"expected 10 tab-separated columns, found {len(columns)}", line_number)
            rows.append(columns)
            line_numbers.append(line_number)
    if rows:
        close_sentence()
    logger.info(f"Read {len(sentences)} sentences from {path}")
    return sentences


def write_conll(sentences: Sequence[Sentence], heads: Sequence[Sequence[int]],
                rels: Sequence[Sequence[str]], path: str) -> None:
    """
    Write sentences with predicted HEAD and DEPREL columns.

    Args:
        sentences (Sequence[Sentence]): Input sentences supplying the surface columns.
        heads (Sequence[Sequence[int]]): Predicted heads per sentence.
        rels (Sequence[Sequence[str]]): Predicted relation labels per sentence.
        path (str): Output file.

    Raises:
        ValueError: If any heads/rels length differs from its sentence length.
    """
    if not len(sentences) == len(heads) == len(rels):
        raise ValueError(f"Error: {len(sentences)} sentences but {len(heads)} head rows and {len(rels)} label rows")
    lines = []
    for index, (sentence, sentence_heads, sentence_rels) in enumerate(zip(sentences, heads, rels)):
        if not sentence.n == len(sentence_heads) == len(sentence_rels):
            raise ValueError(f"Error: sentence {index} has {sentence.n} tokens, "
                             f"{len(sentence_heads)} heads and {len(sentence_rels)} labels")
        for position, (token, head, rel) in enumerate(zip(sentence.tokens, sentence_heads, sentence_rels), start=1):
            lines.append("\t".join([
                str(position),
                token.form,
                token.lemma or ABSENT,
                token.cpos or ABSENT,
                token.fpos,
                "|".join(token.feats) if token.feats else ABSENT,
                str(head),
                rel,
                ABSENT,
                ABSENT,
            ]))
        lines.append("")
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write("".join(line + "\n" for line in lines))
    logger.info(f"Wrote {len(sentences)} sentences to {path}")


def _channel_strings(token: Token, channel: str) -> List[str]:
    value = token.channel(channel)
    if value is None:
        return []
    if isinstance(value, list):
        return value
    return [value]


class Vocabulary:
    """
    Per-channel string to id tables plus the relation label table.

    In every feature channel id 0 is the unknown token and id 1 the ROOT
    pseudo-token; strings seen at least twice in training follow. The relation
    table reserves id 0 for unseen labels.
    """

    UNK_ID = 0
    ROOT_ID = 1

    def __init__(self, itos: Dict[str, List[str]], relations: List[str],
                 counts: Optional[Dict[str, Counter]] = None) -> None:
        self.itos = itos
        self.relations = relations
        self.counts = counts or {}
        self.stoi = {channel: {s: i for i, s in enumerate(strings)} for channel, strings in itos.items()}
        self.relation_ids = {label: i for i, label in enumerate(relations)}

    @property
    def channels(self) -> List[str]:
        return list(self.itos)

    def size(self, channel: str) -> int:
        return len(self.itos[channel])

    @property
    def relation_count(self) -> int:
        return len(self.relations)

    def lookup(self, channel: str, value: str) -> int:
        return self.stoi[channel].get(value, self.UNK_ID)

    def relation_id(self, label: str) -> int:
        return self.relation_ids.get(label, self.UNK_ID)

    def relation_label(self, relation_id: int) -> str:
        return self.relations[relation_id]

    def encode_token(self, token: Token) -> Dict[str, Union[int, List[int]]]:
        """
        Ids of a token in every channel; feats is a bag of ids.

        A scalar channel with no value in the input maps to the unknown id.
        """
        ids: Dict[str, Union[int, List[int]]] = {}
        for channel in self.itos:
            strings = _channel_strings(token, channel)
            if channel == "feats":
                ids[channel] = [self.lookup(channel, atom) for atom in strings]
            else:
                ids[channel] = self.lookup(channel, strings[0]) if strings else self.UNK_ID
        return ids

    def encode(self, sentence: Sentence) -> List[Dict[str, Union[int, List[int]]]]:
        """Ids for position 0 (ROOT) followed by the sentence's tokens."""
        root = {channel: ([self.ROOT_ID] if channel == "feats" else self.ROOT_ID) for channel in self.itos}
        return [root] + [self.encode_token(token) for token in sentence.tokens]

    def to_dict(self) -> Dict[str, List[str]]:
        return {"channels": {channel: list(strings) for channel, strings in self.itos.items()},
                "relations": list(self.relations)}

    @classmethod
    def from_dict(cls, data: Dict) -> "Vocabulary":
        return cls({channel: list(strings) for channel, strings in data["channels"].items()}, list(data["relations"]))


def available_channels(sentences: Iterable[Sentence]) -> List[str]:
    """Form and fine POS plus every optional channel some token carries."""
    present = {"form", "fpos"}
    for sentence in sentences:
        for token in sentence.tokens:
            if token.lemma is not None:
                present.add("lemma")
            if token.cpos is not None:
                present.add("cpos")
            if token.feats:
                present.add("feats")
    return [channel for channel in CHANNELS if channel in present]


def build_vocab(sentences: Sequence[Sentence], channels: Sequence[str]) -> Vocabulary:
    """
    Build per-channel vocabularies; training singletons map to the unknown id.

    Args:
        sentences (Sequence[Sentence]): Training sentences.
        channels (Sequence[str]): Subset of CHANNELS to index.

    Returns:
        Vocabulary: The tables.

    Raises:
        ValueError: If the training set is empty or a channel is unknown.
    """
    if not sentences:
        raise ValueError("Error: cannot build a vocabulary from an empty training set")
    unknown = [channel for channel in channels if channel not in CHANNELS]
    if unknown:
        raise ValueError(f"Error: unknown channels: {', '.join(unknown)}")

    counts: Dict[str, Counter] = {channel: Counter() for channel in channels}
    relation_counts: Counter = Counter()
    for sentence in sentences:
        for token in sentence.tokens:
            for channel in channels:
                counts[channel].update(_channel_strings(token, channel))
            relation_counts[token.gold_rel] += 1

    itos: Dict[str, List[str]] = {}
    for channel in channels:
        kept = sorted((s for s, c in counts[channel].items() if c >= 2 and s not in (UNK, ROOT)),
                      key=lambda s: (-counts[channel][s], s))
        itos[channel] = [UNK, ROOT] + kept
    relations = [UNK] + sorted(label for label in relation_counts if label != UNK)

    vocabulary = Vocabulary(itos, relations, counts)
    sizes = ", ".join(f"{channel}={vocabulary.size(channel)}" for channel in channels)
    logger.info(f"Vocabulary built: {sizes}, relations={vocabulary.relation_count}")
    return vocabulary


class LinearCongruentialGenerator:
    """Numerical Recipes LCG; the same stream on every platform for a given seed."""

    MODULUS = 2 ** 32
    MULTIPLIER = 1664525
    INCREMENT = 1013904223

    def __init__(self, seed: int) -> None:
        self.state = seed % self.MODULUS

    def next_int(self) -> int:
        self.state = (self.MULTIPLIER * self.state + self.INCREMENT) % self.MODULUS
        return self.state

    def below(self, bound: int) -> int:
        # top bits; the low bits of a power-of-two LCG have short periods
        return (self.next_int() * bound) >> 32

    def shuffle(self, items: List) -> List:
        items = list(items)
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def split_dev(sentences: Sequence[Sentence], seed: int, ratio: float = 0.05) -> CorpusSplit:
    """
    Hold out a random fraction of the training sentences as a dev set.

    Args:
        sentences (Sequence[Sentence]): Full training data.
        seed (int): Shuffle seed.
        ratio (float): Dev fraction, rounded to whole sentences.

    Returns:
        CorpusSplit: Disjoint train and dev lists, each in original order.

    Raises:
        ValueError: If fewer than 20 sentences are given.
    """
    if len(sentences) < 20:
        raise ValueError(f"Error: need at least 20 sentences to split off a dev set, got {len(sentences)}")
    dev_size = int(round(ratio * len(sentences)))
    order = LinearCongruentialGenerator(seed).shuffle(range(len(sentences)))
    dev_indices = set(order[:dev_size])
    train = [s for i, s in enumerate(sentences) if i not in dev_indices]
    dev = [s for i, s in enumerate(sentences) if i in dev_indices]
    logger.info(f"Split {len(sentences)} sentences into {len(train)} train / {len(dev)} dev (seed {seed})")
    return CorpusSplit(train=train, dev=dev, split_seed=seed)


def crossed_arcs(heads: Union[Sentence, Sequence[int]]) -> Set[int]:
    """
    Tokens whose arc crosses some other arc of the same tree.

    Arc (h, m) is crossed when another arc has one endpoint strictly inside
    min(h, m)..max(h, m) and the other strictly outside. Attachments to ROOT take
    no part: ROOT has no surface position.

    Args:
        heads (Union[Sentence, Sequence[int]]): A sentence (gold heads) or a head array.

    Returns:
        Set[int]: 1-based positions of crossed modifiers.
    """
    if isinstance(heads, Sentence):
        heads = heads.heads
    arcs = [(min(h, m), max(h, m), m) for m, h in enumerate(heads, start=1) if h != 0]
    crossed: Set[int] = set()
    for i, (lo, hi, modifier) in enumerate(arcs):
        for other_lo, other_hi, other_modifier in arcs[i + 1:]:
            if lo < other_lo < hi < other_hi or other_lo < lo < other_hi < hi:
                crossed.add(modifier)
                crossed.add(other_modifier)
    return crossed
