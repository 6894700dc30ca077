import argparse
import dataclasses
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from classes.checks import CheckResult, run_checks
from classes.config_loader import ConfigError, ConfigLoader, RunConfig
from classes.corpus import CoNLLFormatError, CorpusSplit, read_conll, split_dev, write_conll
from classes.decoder import ParseTree
from classes.embedding import VectorFormatError, load_pretrained
from classes.evaluator import EvalReport, score
from classes.model_archive import ArchiveError, ModelArchive
from classes.numerics import ContractError, DimensionError
from classes.parser import DependencyParser
from classes.trainer import Trainer, TrainingResult

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_COLUMNS = ["epoch", "dev_log_likelihood", "learning_rate", "seconds"]


class ParserWorkflow:
    """
    Wires corpus reading, training, parsing and evaluation together for one
    resolved run configuration.
    """

    def __init__(self, run: RunConfig, progress: bool = False) -> None:
        self.run = run
        self.progress = progress

    def __read_split(self) -> CorpusSplit:
        """Training sentences plus either the dev file or a held-out share of training."""
        paths = self.run.paths
        sentences = read_conll(paths["train"], require_tree=True)
        if paths.get("dev"):
            return CorpusSplit(train=sentences, dev=read_conll(paths["dev"], require_tree=True), split_seed=self.run.seed)
        return split_dev(sentences, self.run.seed, self.run.train.dev_ratio)

    def train(self) -> TrainingResult:
        """
        Train a model and write its archive and the per-epoch log.

        Returns:
            TrainingResult: Best-epoch parameters and the training log.
        """
        paths = self.run.paths
        split = self.__read_split()
        config = dataclasses.replace(self.run.train, progress=self.progress)
        trainer = Trainer.for_corpus(config, split.train)
        with_vectors = bool(paths.get("vectors")) and config.pretrained_init
        embedding_dim = config.resolve_embedding_dim(with_vectors)
        params = trainer.initial_params(embedding_dim)
        if with_vectors:
            load_pretrained(paths["vectors"], params["embed.form"], trainer.vocabulary)

        learning_rate = config.learning_rate
        grid = config.lr_grid()
        if grid:
            learning_rate, _ = trainer.lr_grid_search(split, params, grid)
        result = trainer.train(split, params, learning_rate)

        resolved = dataclasses.replace(config, learning_rate=learning_rate, embedding_dim=embedding_dim,
                                       channels=tuple(trainer.channels))
        echo = dataclasses.replace(self.run, train=resolved).to_dict()
        ModelArchive(config=echo, vocabulary=trainer.vocabulary, params=result.params,
                     channels=list(trainer.channels)).save(paths["model_out"])

        log_path = paths.get("log") or f"{paths['model_out']}.log.tsv"
        result.log.reindex(columns=LOG_COLUMNS).to_csv(log_path, sep="\t", index=False)
        logger.info(f"Training log written to {log_path} ({len(result.log)} epochs)")
        return result

    def parse(self) -> List[ParseTree]:
        """Parse the test file with a saved model and write CoNLL-X predictions."""
        paths = self.run.paths
        archive = ModelArchive.load(paths["model_in"])
        parser = DependencyParser.from_archive(archive, mode=self.run.decode_mode, single_root=self.run.single_root)
        sentences = read_conll(paths["test"])
        trees = parser.parse_corpus(sentences, progress=self.progress)
        write_conll(sentences, [tree.heads for tree in trees], [tree.rels for tree in trees], paths["output"])
        return trees

    def evaluate(self) -> EvalReport:
        """Score a predicted CoNLL-X file against the gold file."""
        gold = read_conll(self.run.paths["gold"], require_tree=True)
        predicted = [ParseTree(heads=s.heads, rels=s.rels) for s in read_conll(self.run.paths["predicted"])]
        return score(gold, predicted)

    def check(self) -> List[CheckResult]:
        return run_checks(self.run.seed)


def build_argument_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file of 'key = value' lines")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    common.add_argument("--quiet", action="store_true", help="warnings and errors only")
    common.add_argument("--progress", action="store_true", help="show progress bars")

    parser = argparse.ArgumentParser(prog="biattdp", description="Bi-directional attention dependency parser")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", parents=[common], help="train a model")
    train.add_argument("--train", dest="paths.train", help="training treebank (CoNLL-X)")
    train.add_argument("--dev", dest="paths.dev", help="dev treebank; held out from training when absent")
    train.add_argument("--vectors", dest="paths.vectors", help="pretrained word vectors")
    train.add_argument("--model-out", dest="paths.model_out", help="model archive to write")
    train.add_argument("--log", dest="paths.log", help="training log to write")
    train.add_argument("--hidden-size", dest="train.hidden_size", type=int)
    train.add_argument("--embedding-dim", dest="train.embedding_dim", type=int)
    train.add_argument("--learning-rate", dest="train.learning_rate", type=float)
    train.add_argument("--lr-grid-start", dest="train.lr_grid_start", type=float)
    train.add_argument("--lr-grid-count", dest="train.lr_grid_count", type=int)
    train.add_argument("--max-epochs", dest="train.max_epochs", type=int)
    train.add_argument("--directions", dest="train.directions", choices=["both", "l2r", "r2l"])
    train.add_argument("--channels", dest="train.channels", help="comma-separated channels or 'auto'")
    train.add_argument("--no-pos", dest="train.use_pos", action="store_const", const=False)
    train.add_argument("--no-pretrained-init", dest="train.pretrained_init", action="store_const", const=False)
    train.add_argument("--no-soft-head-feed", dest="train.feed_soft_head", action="store_const", const=False)

    parse = commands.add_parser("parse", parents=[common], help="parse a treebank with a trained model")
    parse.add_argument("--model", dest="paths.model_in", help="model archive")
    parse.add_argument("--input", dest="paths.test", help="sentences to parse (CoNLL-X)")
    parse.add_argument("--output", dest="paths.output", help="predictions to write")
    parse.add_argument("--decode", dest="decode.mode", choices=["greedy", "mst"])
    parse.add_argument("--single-root", dest="decode.single_root", action="store_const", const=True)

    evaluate = commands.add_parser("eval", parents=[common], help="score predictions against gold trees")
    evaluate.add_argument("--gold", dest="paths.gold", help="gold treebank")
    evaluate.add_argument("--predicted", dest="paths.predicted", help="predicted treebank")

    commands.add_parser("check", parents=[common], help="run the numeric property suites")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted configuration keys given explicitly on the command line."""
    overrides = {key: value for key, value in vars(args).items() if "." in key and value is not None}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def configure_logging(verbose: bool, quiet: bool) -> None:
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif quiet:
        logging.getLogger().setLevel(logging.WARNING)


def run_command(run: RunConfig, progress: bool = False) -> int:
    workflow = ParserWorkflow(run, progress=progress)
    if run.command == "train":
        workflow.train()
    elif run.command == "parse":
        workflow.parse()
    elif run.command == "eval":
        sys.stdout.write(workflow.evaluate().to_text(percent=True))
    else:
        results = workflow.check()
        for result in results:
            sys.stdout.write(f"{result.name}\t{'PASS' if result.passed else 'FAIL'}\t{result.detail}\n")
        failed = [result.name for result in results if not result.passed]
        if failed:
            logger.error(f"Error: failed properties: {', '.join(failed)}")
            return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: 0 on success, 1 on an internal failure or failed check, 2 on a usage,
        configuration or input error.
    """
    try:
        args = build_argument_parser().parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)
    configure_logging(args.verbose, args.quiet)

    try:
        run = ConfigLoader(args.config).load(args.command, overrides_from_args(args))
        for name in ("train", "dev", "test", "vectors", "model_in", "gold", "predicted"):
            path = run.paths.get(name)
            if path and not os.path.isfile(path):
                raise ConfigError(f"Error: paths.{name} '{path}' does not exist")
        return run_command(run, progress=args.progress)
    except (ContractError, DimensionError) as error:
        logger.error(f"An internal error occurred: {error}")
        return EXIT_FAILURE
    except (ConfigError, CoNLLFormatError, ArchiveError, VectorFormatError, FileNotFoundError, ValueError) as error:
        logger.error(f"An error occurred during execution: {error}")
        return EXIT_USAGE
    except Exception as error:
        logger.error(f"An error occurred during execution: {error}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
