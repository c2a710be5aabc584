"""Run-config file parsing.

The config format is sectioned key/value text (INI). Section names are
organizational only; keys form one flat namespace matching the RunConfig
fields, so ``--set key=value`` overrides work uniformly. Example::

    [schedule]
    base = 4
    increment = 2

    [loss]
    alpha = 1.2
    beta = 0.7

An empty or absent file yields all defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from pathlib import Path

from .errors import ConfigError
from .trainer import RunConfig

_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}

_BOOL = {"true": True, "1": True, "yes": True,
         "false": False, "0": False, "no": False}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = _FIELDS[key].default
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in _BOOL:
                raise ValueError(f"not a boolean: {raw!r}")
            return _BOOL[raw.lower()]
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from None
    return raw  # str or Optional[str]


def parse_scenario(text: str) -> tuple[int, int]:
    """'B4-C2' (case-insensitive, dash optional) -> (4, 2)."""
    m = re.fullmatch(r"[Bb](\d+)-?[Cc](\d+)", text.strip())
    if not m:
        raise ConfigError(f"bad scenario {text!r}; expected e.g. B4-C2")
    return int(m.group(1)), int(m.group(2))


def parse_config(path=None, overrides: list[str] | None = None) -> RunConfig:
    """Build a validated RunConfig from a file plus key=value overrides.

    Overrides win over file values; defaults fill everything else.
    """
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            parser.read_string(path.read_text())
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                values[key] = _coerce(key, raw)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return RunConfig(**values).validate()
