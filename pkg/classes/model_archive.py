import logging
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
import yaml

from classes.corpus import Vocabulary
from classes.parameters import ParameterSet

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MAGIC = b"BIATTDP-ARCHIVE\n"
FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f8")


class ArchiveError(ValueError):
    """Raised for truncated, corrupt or incompatible model archives."""


@dataclass
class ModelArchive:
    """
    A trained model on disk.

    Layout: magic line, 8-byte little-endian header length, YAML header
    (format version, config echo, vocabularies, tensor directory), then the
    tensors as little-endian float64 in directory order.
    """
    config: Dict[str, Any]
    vocabulary: Vocabulary
    params: ParameterSet
    channels: List[str] = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    def __header(self) -> bytes:
        header = {
            "format_version": self.format_version,
            "config": self.config,
            "channels": list(self.channels),
            "vocabulary": self.vocabulary.to_dict(),
            "tensors": [{"name": name, "shape": list(self.params[name].shape)} for name in self.params],
        }
        return yaml.safe_dump(header, allow_unicode=True, sort_keys=False).encode("utf-8")

    def save(self, path: str) -> None:
        """
        Write the archive; identical models give byte-identical files.

        Args:
            path (str): Destination file.
        """
        header = self.__header()
        try:
            with open(path, "wb") as file:
                file.write(MAGIC)
                file.write(struct.pack("<Q", len(header)))
                file.write(header)
                for name in self.params:
                    file.write(np.ascontiguousarray(self.params[name], dtype=PAYLOAD_DTYPE).tobytes())
        except OSError as error:
            logger.error(f"Error: unable to write model archive '{path}': {error}")
            raise
        logger.info(f"Model archive saved to {path} ({self.params.parameter_count()} parameters)")

    @staticmethod
    def __read_header(data: bytes, path: str) -> Dict[str, Any]:
        """
        Split off and parse the YAML header.

        Raises:
            ArchiveError: On a bad magic line, a truncated header or invalid YAML.
        """
        if not data.startswith(MAGIC):
            raise ArchiveError(f"Error: '{path}' is not a model archive")
        offset = len(MAGIC)
        if len(data) < offset + 8:
            raise ArchiveError(f"Error: '{path}' is truncated before the header length")
        (header_length,) = struct.unpack("<Q", data[offset:offset + 8])
        offset += 8
        if len(data) < offset + header_length:
            raise ArchiveError(f"Error: '{path}' is truncated inside the header")
        try:
            header = yaml.safe_load(data[offset:offset + header_length].decode("utf-8"))
        except (yaml.YAMLError, UnicodeDecodeError) as error:
            logger.error(f"Error: unable to load archive header from '{path}': {error}")
            raise ArchiveError(f"Error: unable to load archive header from '{path}': {error}")
        if not isinstance(header, dict):
            raise ArchiveError(f"Error: archive header of '{path}' is not a mapping")
        header["_payload_offset"] = offset + header_length
        return header

    @classmethod
    def load(cls, path: str) -> "ModelArchive":
        """
        Read an archive written by save.

        Raises:
            ArchiveError: On a version mismatch, a payload of the wrong length or a corrupt header.
            FileNotFoundError: If the file does not exist.
        """
        try:
            with open(path, "rb") as file:
                data = file.read()
        except FileNotFoundError as error:
            logger.error(f"Error: model archive '{path}' not found: {error}")
            raise
        header = cls.__read_header(data, path)
        version = header.get("format_version")
        if version != FORMAT_VERSION:
            logger.error(f"Error: archive format version {version} found, expected {FORMAT_VERSION}")
            raise ArchiveError(f"Error: archive format version {version} found, expected {FORMAT_VERSION}")

        payload = data[header["_payload_offset"]:]
        directory = header.get("tensors") or []
        expected = sum(int(np.prod(entry["shape"], dtype=np.int64)) for entry in directory) * PAYLOAD_DTYPE.itemsize
        if len(payload) != expected:
            logger.error(f"Error: archive payload holds {len(payload)} bytes, directory needs {expected}")
            raise ArchiveError(f"Error: archive payload holds {len(payload)} bytes, directory needs {expected}")

        tensors: Dict[str, np.ndarray] = {}
        offset = 0
        for entry in directory:
            shape = tuple(int(dim) for dim in entry["shape"])
            count = int(np.prod(shape, dtype=np.int64))
            tensors[entry["name"]] = np.frombuffer(payload, dtype=PAYLOAD_DTYPE, count=count,
                                                   offset=offset).reshape(shape).astype(np.float64)
            offset += count * PAYLOAD_DTYPE.itemsize
        logger.info(f"Model archive loaded from {path} ({len(tensors)} tensors)")
        return cls(config=header.get("config") or {}, vocabulary=Vocabulary.from_dict(header["vocabulary"]),
                   params=ParameterSet(tensors), channels=list(header.get("channels") or []),
                   format_version=version)
