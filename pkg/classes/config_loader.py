import logging
import os
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, List, Mapping, Optional

from decouple import Config, Csv, RepositoryEmpty, RepositoryEnv, Undefined, UndefinedValueError, undefined

from classes.trainer import TrainConfig

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

COMMANDS = ("train", "parse", "eval", "check")
DECODE_MODES = ("greedy", "mst")
PATH_KEYS = ("train", "dev", "test", "vectors", "model_in", "model_out", "output", "log", "gold", "predicted")
REQUIRED_PATHS: Dict[str, List[str]] = {
    "train": ["train", "model_out"],
    "parse": ["model_in", "test", "output"],
    "eval": ["gold", "predicted"],
    "check": [],
}


class ConfigError(ValueError):
    """Raised for unreadable, unknown or invalid configuration entries."""


def _optional(cast: Callable[[str], Any]) -> Callable[[str], Any]:
    """Cast that maps an empty value to None."""
    def convert(value):
        if value is None or (isinstance(value, str) and not value.strip()):
            return None
        return cast(value)
    return convert


class RunFileConfig(Config):
    """
    decouple Config whose only source is the run file.

    Environment variables are not consulted, so an exported `seed` cannot
    shadow the file.
    """

    def get(self, option, default=undefined, cast=undefined):
        data = getattr(self.repository, "data", {})
        if option in data:
            value = data[option]
        elif isinstance(default, Undefined):
            raise UndefinedValueError(f"{option} not found. Declare it in the run file or give it a default.")
        else:
            value = default
        return self.cast(value, cast)

    def cast(self, value, cast=undefined):
        if isinstance(cast, Undefined):
            return value
        if cast is bool:
            return self._cast_boolean(value)
        return cast(value)


_TRAIN_DEFAULTS = TrainConfig()

# dotted key -> (cast, default)
KEYS: Dict[str, tuple] = {
    "seed": (int, 1),
    **{f"paths.{name}": (_optional(str), None) for name in PATH_KEYS},
    "train.learning_rate": (float, _TRAIN_DEFAULTS.learning_rate),
    "train.lr_grid_start": (_optional(float), None),
    "train.lr_grid_step": (float, _TRAIN_DEFAULTS.lr_grid_step),
    "train.lr_grid_count": (int, 0),
    "train.adam_beta1": (float, _TRAIN_DEFAULTS.adam_beta1),
    "train.adam_beta2": (float, _TRAIN_DEFAULTS.adam_beta2),
    "train.adam_epsilon": (float, _TRAIN_DEFAULTS.adam_epsilon),
    "train.hidden_size": (int, _TRAIN_DEFAULTS.hidden_size),
    "train.embedding_dim": (_optional(int), None),
    "train.channels": (Csv(), "auto"),
    "train.pretrained_init": (bool, True),
    "train.use_pos": (bool, True),
    "train.directions": (str, "both"),
    "train.feed_soft_head": (bool, True),
    "train.soft_head_root": (bool, True),
    "train.max_epochs": (int, _TRAIN_DEFAULTS.max_epochs),
    "train.dev_ratio": (float, _TRAIN_DEFAULTS.dev_ratio),
    "train.init_std": (float, _TRAIN_DEFAULTS.init_std),
    "decode.mode": (str, "mst"),
    "decode.single_root": (bool, False),
}


@dataclass
class RunConfig:
    """Everything one CLI command needs: paths, training knobs, decoding mode and seed."""
    command: str
    paths: Dict[str, Optional[str]] = field(default_factory=lambda: {name: None for name in PATH_KEYS})
    train: TrainConfig = field(default_factory=TrainConfig)
    decode_mode: str = "mst"
    single_root: bool = False
    seed: int = 1

    def to_dict(self) -> Dict[str, Any]:
        """Flat dotted-key echo, as stored in model archives."""
        echo: Dict[str, Any] = {"seed": self.seed, "decode.mode": self.decode_mode, "decode.single_root": self.single_root}
        for item in fields(TrainConfig):
            if f"train.{item.name}" in KEYS:
                value = getattr(self.train, item.name)
                echo[f"train.{item.name}"] = list(value) if item.name == "channels" else value
        return echo

    def require(self, *names: str) -> None:
        """
        Validate that the given paths are set.

        Raises:
            ConfigError: Listing every missing path key.
        """
        missing = [f"paths.{name}" for name in names if not self.paths.get(name)]
        if missing:
            logger.error(f"Error: missing required configuration keys for '{self.command}': {', '.join(missing)}")
            raise ConfigError(f"Error: missing required configuration keys for '{self.command}': {', '.join(missing)}")


class ConfigLoader:
    """
    Reads run configuration files of dotted "key = value" lines.

    Built-in defaults are overridden by the file, which is overridden by
    explicit values (normally CLI flags).
    """

    def __init__(self, config_file: Optional[str] = None) -> None:
        self.config_file = config_file
        self.repository = self.__open_repository()
        self.config = RunFileConfig(self.repository)

    def __open_repository(self):
        """
        Open the configuration file through decouple.

        Raises:
            ConfigError: If the file cannot be read.
        """
        if self.config_file is None:
            return RepositoryEmpty()
        if not os.path.isfile(self.config_file):
            logger.error(f"Error: configuration file '{self.config_file}' not found")
            raise ConfigError(f"Error: configuration file '{self.config_file}' not found")
        try:
            return RepositoryEnv(self.config_file)
        except (OSError, UnicodeDecodeError) as error:
            logger.error(f"Error: unable to read configuration file '{self.config_file}': {error}")
            raise ConfigError(f"Error: unable to read configuration file '{self.config_file}': {error}")

    def file_keys(self) -> List[str]:
        return list(getattr(self.repository, "data", {}))

    @staticmethod
    def __validate_keys(keys: List[str], source: str) -> None:
        """
        Reject keys that are not recognised.

        Raises:
            ConfigError: Listing the unknown keys.
        """
        unknown = sorted(key for key in keys if key not in KEYS)
        if unknown:
            logger.error(f"Error: unknown configuration keys in {source}: {', '.join(unknown)}")
            raise ConfigError(f"Error: unknown configuration keys in {source}: {', '.join(unknown)}")

    def __read_value(self, key: str, overrides: Mapping[str, Any]) -> Any:
        cast, default = KEYS[key]
        if key in overrides and overrides[key] is not None:
            value = overrides[key]
            return value if not isinstance(value, str) else self.config.cast(value, cast)
        try:
            return self.config(key, default=default, cast=cast)
        except UndefinedValueError as error:
            logger.error(f"Error: configuration key '{key}' undefined: {error}")
            raise ConfigError(f"Error: configuration key '{key}' undefined: {error}")

    def values(self, overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        """
        Resolve every recognised key.

        Raises:
            ConfigError: On unknown keys or values that fail to cast.
        """
        overrides = overrides or {}
        self.__validate_keys(self.file_keys(), self.config_file or "defaults")
        self.__validate_keys(list(overrides), "command-line overrides")
        resolved: Dict[str, Any] = {}
        for key in KEYS:
            try:
                resolved[key] = self.__read_value(key, overrides)
            except ValueError as error:
                if isinstance(error, ConfigError):
                    raise
                logger.error(f"Error: invalid value for '{key}': {error}")
                raise ConfigError(f"Error: invalid value for '{key}': {error}")
        return resolved

    def load(self, command: str, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """
        Build the RunConfig for a command and check its required paths.

        Args:
            command (str): One of train, parse, eval, check.
            overrides (Optional[Mapping[str, Any]]): Dotted-key values taking precedence over the file.

        Returns:
            RunConfig: Validated configuration.

        Raises:
            ConfigError: On unknown keys, invalid values or missing required paths.
        """
        if command not in COMMANDS:
            raise ConfigError(f"Error: unknown command '{command}'")
        values = self.values(overrides)
        if values["decode.mode"] not in DECODE_MODES:
            raise ConfigError(f"Error: decode.mode must be one of {', '.join(DECODE_MODES)}, got '{values['decode.mode']}'")
        train_values = {key.split(".", 1)[1]: value for key, value in values.items() if key.startswith("train.")}
        train_values["channels"] = tuple(train_values["channels"]) or ("auto",)
        try:
            train = TrainConfig(seed=values["seed"], **train_values)
        except ValueError as error:
            logger.error(f"Error: invalid training configuration: {error}")
            raise ConfigError(f"Error: invalid training configuration: {error}")
        run = RunConfig(
            command=command,
            paths={name: values[f"paths.{name}"] for name in PATH_KEYS},
            train=train,
            decode_mode=values["decode.mode"],
            single_root=values["decode.single_root"],
            seed=values["seed"],
        )
        run.require(*REQUIRED_PATHS[command])
        logger.info(f"Loaded configuration for '{command}' from {self.config_file or 'defaults'}")
        return run


def train_config_from_echo(echo: Mapping[str, Any]) -> TrainConfig:
    """Rebuild a TrainConfig from the dotted-key echo stored in an archive."""
    values = {key.split(".", 1)[1]: value for key, value in echo.items() if key.startswith("train.")}
    if "channels" in values:
        values["channels"] = tuple(values["channels"])
    return TrainConfig(seed=echo.get("seed", 1), **values)
