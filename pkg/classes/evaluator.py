import logging
import unicodedata
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import pandas as pd

from classes.corpus import Sentence, crossed_arcs
from classes.decoder import ParseTree

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

REPORT_KEYS = ("uas", "las", "crossed_recall", "uncrossed_recall", "pct_crossed", "counted_tokens", "total_tokens")
RATE_KEYS = ("uas", "las", "crossed_recall", "uncrossed_recall", "pct_crossed")


def is_scoring_token(form: str) -> bool:
    """False iff every character of the form is Unicode punctuation (general category P*)."""
    return not form or not all(unicodedata.category(char).startswith("P") for char in form)


@dataclass
class EvalReport:
    """
    Attachment scores over scoring (non-punctuation) tokens.

    A rate whose denominator is empty is None.
    """
    uas: Optional[float]
    las: Optional[float]
    crossed_recall: Optional[float]
    uncrossed_recall: Optional[float]
    pct_crossed: Optional[float]
    counted_tokens: int
    total_tokens: int

    def to_text(self, percent: bool = False) -> str:
        """
        Serialise as "key<TAB>value" lines.

        Args:
            percent (bool): Show rates as percentages with two decimals.
        """
        lines = []
        for key, value in asdict(self).items():
            if value is None:
                shown = "n/a"
            elif key in RATE_KEYS:
                shown = f"{100.0 * value:.2f}" if percent else repr(float(value))
            else:
                shown = str(value)
            lines.append(f"{key}\t{shown}")
        return "\n".join(lines) + "\n"


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def token_table(gold: Sequence[Sentence], predicted: Sequence[ParseTree]) -> pd.DataFrame:
    """
    One row per gold token with its scoring, crossing and correctness flags.

    Raises:
        ValueError: If the corpora differ in length or a sentence pair differs in token count.
    """
    if len(gold) != len(predicted):
        logger.error(f"Error: {len(gold)} gold sentences but {len(predicted)} predicted")
        raise ValueError(f"Error: {len(gold)} gold sentences but {len(predicted)} predicted")
    rows: List[dict] = []
    for index, (sentence, tree) in enumerate(zip(gold, predicted)):
        if sentence.n != tree.n:
            logger.error(f"Error: sentence {index} has {sentence.n} gold tokens but {tree.n} predicted")
            raise ValueError(f"Error: sentence {index} has {sentence.n} gold tokens but {tree.n} predicted")
        crossed = crossed_arcs(sentence.heads)
        for t, token in enumerate(sentence.tokens, start=1):
            head_ok = tree.heads[t - 1] == token.gold_head
            rows.append({
                "sentence": index,
                "position": t,
                "scoring": is_scoring_token(token.form),
                "crossed": t in crossed,
                "head_ok": head_ok,
                "label_ok": head_ok and tree.rels[t - 1] == token.gold_rel,
            })
    return pd.DataFrame(rows, columns=["sentence", "position", "scoring", "crossed", "head_ok", "label_ok"])


def score(gold: Sequence[Sentence], predicted: Sequence[ParseTree]) -> EvalReport:
    """
    UAS, LAS and crossed / uncrossed arc recall, punctuation excluded.

    Args:
        gold (Sequence[Sentence]): Gold sentences.
        predicted (Sequence[ParseTree]): One predicted tree per gold sentence.

    Returns:
        EvalReport: Rates at full precision.
    """
    table = token_table(gold, predicted)
    counted = table[table["scoring"]]
    crossed = counted[counted["crossed"]]
    uncrossed = counted[~counted["crossed"]]
    report = EvalReport(
        uas=_ratio(int(counted["head_ok"].sum()), len(counted)),
        las=_ratio(int(counted["label_ok"].sum()), len(counted)),
        crossed_recall=_ratio(int(crossed["head_ok"].sum()), len(crossed)),
        uncrossed_recall=_ratio(int(uncrossed["head_ok"].sum()), len(uncrossed)),
        pct_crossed=_ratio(len(crossed), len(counted)),
        counted_tokens=len(counted),
        total_tokens=len(table),
    )
    logger.info(f"Scored {len(gold)} sentences: {report.counted_tokens} of {report.total_tokens} tokens counted")
    return report
