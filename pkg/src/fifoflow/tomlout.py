"""Minimal TOML serialization for report files.

Covers exactly what reports need: scalars, lists of scalars, and nested
tables. (The usual writer package is not available everywhere this runs;
parsing uses the standard tomllib/tomli.)
"""

from __future__ import annotations

import json
import math
import re
from typing import Any, Mapping

_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")


def _key(k: str) -> str:
    return k if _BARE_KEY.match(k) else json.dumps(k)


def _scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        r = repr(v)
        # TOML floats need a decimal point or exponent
        return r if ("." in r or "e" in r or "E" in r) else r + ".0"
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__} as a TOML scalar")


def _value(v: Any) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_value(item) for item in v) + "]"
    return _scalar(v)


def dumps(data: Mapping[str, Any]) -> str:
    """Serialize a mapping of scalars/lists/nested mappings to TOML text."""
    lines: list[str] = []

    def emit(table: Mapping[str, Any], prefix: tuple[str, ...]) -> None:
        subtables = []
        for k, v in table.items():
            if isinstance(v, Mapping):
                subtables.append((k, v))
            else:
                lines.append(f"{_key(k)} = {_value(v)}")
        for k, v in subtables:
            path = prefix + (k,)
            lines.append("")
            lines.append("[" + ".".join(_key(p) for p in path) + "]")
            emit(v, path)

    emit(data, ())
    text = "\n".join(lines).lstrip("\n")
    return text + "\n" if text else ""
