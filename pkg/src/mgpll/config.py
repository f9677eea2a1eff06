"""
Key-value configuration files for the command-line scripts.

One ``key = value`` per line; ``#`` starts a comment. Keys are long flag
names with dashes or underscores (``batch-size`` or ``batch_size``). Values
from a file become argparse defaults, so explicit flags still win.
"""

import argparse
import os
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError

ENV_CONFIG = "MGPLL_CONFIG"

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in _TRUE:
        return True
    if key in _FALSE:
        return False
    raise ConfigError(f"expected a boolean (true/false/yes/no/1/0), got {text!r}")


def read_config_file(path: Union[str, Path]) -> dict[str, tuple[int, str]]:
    """
    Parse a config file into {key: (line number, raw value)}.

    Keys are normalized to underscores. Later lines override earlier ones.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    entries: dict[str, tuple[int, str]] = {}
    with open(path) as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{line_no}: empty key")
            entries[key.replace("-", "_")] = (line_no, value)
    return entries


def resolve_config_path(explicit: Optional[str]) -> Optional[Path]:
    """Config file from --config, else from the MGPLL_CONFIG environment variable."""
    value = explicit or os.environ.get(ENV_CONFIG)
    return Path(value) if value else None


def _coerce(action: argparse.Action, value: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        flag = parse_bool(value)
        return flag if isinstance(action, argparse._StoreTrueAction) else not flag
    convert = action.type or str
    if action.nargs in ("+", "*"):
        return [convert(part.strip()) for part in value.split(",") if part.strip()]
    return convert(value)


def config_defaults(parser: argparse.ArgumentParser, path: Union[str, Path]) -> dict:
    """
    Convert a config file into argparse defaults for one (sub)parser.

    Raises:
        ConfigError: Unknown keys or values the flag's type rejects
    """
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, (line_no, value) in read_config_file(path).items():
        if key not in actions:
            raise ConfigError(f"{path}:{line_no}: unknown option {key!r}")
        action = actions[key]
        try:
            converted = _coerce(action, value)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {e}") from e
        if action.choices is not None:
            items = converted if isinstance(converted, list) else [converted]
            bad = [item for item in items if item not in action.choices]
            if bad:
                raise ConfigError(f"{path}:{line_no}: {key} must be one of {list(action.choices)}")
        defaults[key] = converted
    return defaults
