"""
Plain-text configuration files: one ``key = value`` per line, ``#`` starts a comment.
Keys are the long command-line flag names without the leading dashes.
"""
import logging
import os
from typing import Any, Dict, Mapping, Optional, Union

from ppmmpy.exceptions import ConfigError

__all__ = ("KNOWN_KEYS", "normalize_key", "parse_config_text", "load_config", "merge_options")

logger = logging.getLogger("ppmmpy.bench.config")
logger.propagate = True

KNOWN_KEYS = (
    "method",
    "slices",
    "max-iter",
    "tol",
    "p",
    "seed",
    "reps",
    "dims",
    "n",
    "n-y",
    "weights",
    "mean-x",
    "mean-y",
    "rho-x",
    "rho-y",
    "mean-adjust",
    "ridge",
    "lookup",
    "noise-stop",
    "jobs",
    "out",
    "name",
)


def normalize_key(key: str) -> str:
    """Lower-case a key and accept '_' for '-'."""
    return key.strip().lower().replace("_", "-")


def parse_config_text(text: str) -> Dict[str, str]:
    """
    Parse the content of a config file.

    Parameters
    ----------
    text : str
        The file content

    Raises
    ------
    ConfigError
        if a line is not 'key = value', a key is unknown or repeated

    Returns
    -------
    Dict[str, str]
        The raw values by normalized key
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key, line=number)
        if key in values:
            raise ConfigError("key given twice", key=key, line=number)
        values[key] = value.strip()
    return values


def load_config(path: Union[str, os.PathLike]) -> Dict[str, str]:
    """Read and parse a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file {os.fspath(path)}: {err.strerror}") from err
    except UnicodeDecodeError as err:
        raise ConfigError(
            f"config file {os.fspath(path)} is not UTF-8 text (byte {err.start}: {err.reason})"
        ) from err
    values = parse_config_text(text)
    logger.debug("config %s: %s", os.fspath(path), sorted(values))
    return values


def merge_options(
    defaults: Mapping[str, Any],
    file_values: Optional[Mapping[str, Any]],
    flag_values: Mapping[str, Any],
) -> Dict[str, Any]:
    """
    Combine option sources: flags win over the config file, the file wins over defaults.
    Flags left at None count as not given.
    """
    merged: Dict[str, Any] = dict(defaults)
    if file_values:
        merged.update({normalize_key(k): v for k, v in file_values.items()})
    merged.update({normalize_key(k): v for k, v in flag_values.items() if v is not None})
    return merged
