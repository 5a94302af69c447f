"""Plain ``key = value`` configuration files shared by the device and perf models."""
from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_keyvalue(text: str) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case
    try:
        parser.read_string("[root]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return dict(parser["root"])


def load_keyvalue(path) -> dict[str, str]:
    if str(path) == "default":
        text = resources.files("slimsim").joinpath("data/default.cfg").read_text()
    else:
        text = Path(path).read_text()
    return parse_keyvalue(text)
