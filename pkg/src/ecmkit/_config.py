"""Small helpers for reading the TOML machine/kernel files strictly."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError


def read_toml(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("file not found", source=str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        # tomli messages already carry "(at line N, column M)"
        raise ConfigError(f"parse error: {exc}", source=str(path)) from None


def check_keys(table: Mapping[str, Any], allowed, where: str, source=None, required=()):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}",
                          source=source, field=unknown[0])
    missing = [k for k in required if k not in table]
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(missing)}",
                          source=source, field=missing[0])


def number(table, key, where, source=None, default=None, required=True):
    if key not in table:
        if required and default is None:
            raise ConfigError(f"missing key {key!r} in {where}", source=source, field=key)
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", source=source, field=key)
    return float(value)
