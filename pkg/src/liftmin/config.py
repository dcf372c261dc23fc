"""Run configuration: a small ``key = value`` format.

Grammar, one entry per line::

    # comment
    key = value        # trailing comments allowed

Keys are case-sensitive; unknown keys, bad values and failed constraints are
reported with line and column numbers.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 kind: str = "config"):
        self.line, self.column, self.kind = line, column, kind
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


def _real(text: str) -> float | Fraction:
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)


def _int_vector(text: str) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    return tuple(int(p) for p in parts)


@dataclass
class RunConfig:
    genus: int = 2
    metric: str = "regular-polygon"
    matrix_file: str | None = None
    length_cutoff_max: float = 12.0
    word_cutoff_max: int = 24
    curve: str | None = None
    length_cutoff: float | None = None
    homology: tuple[int, ...] | None = None
    period: float | Fraction = 1
    shift: float | Fraction | None = None
    cover: str | None = None
    start_coset: int = 0
    max_stages: int = 8
    max_index: int = 256

    def validate(self, where: dict[str, tuple[int, int]] | None = None) -> "RunConfig":
        where = where or {}

        def fail(key, msg):
            line, col = where.get(key, (None, None))
            raise ConfigError(msg, line, col)

        if self.genus < 2:
            fail("genus", f"genus must be >= 2, got {self.genus}")
        if self.metric not in ("regular-polygon", "bolza", "commutator", "matrix-file"):
            fail("metric", f"unknown metric {self.metric!r}")
        if self.metric == "matrix-file":
            if not self.matrix_file:
                fail("metric", "metric = matrix-file needs matrix_file")
        if self.matrix_file is not None:
            self.metric = "matrix-file"
            if not Path(self.matrix_file).is_file():
                line, col = where.get("matrix_file", (None, None))
                raise ConfigError(f"matrix file not found: {self.matrix_file}", line, col, kind="io")
        for key in ("length_cutoff_max", "word_cutoff_max", "max_stages", "max_index"):
            if not getattr(self, key) > 0:
                fail(key, f"{key} must be positive")
        if self.length_cutoff is not None and not self.length_cutoff > 0:
            fail("length_cutoff", "length_cutoff must be positive")
        if not self.period > 0:
            fail("period", "period must be positive")
        if self.shift is not None and not self.shift > 0:
            fail("shift", "shift must be positive")
        if self.start_coset < 0:
            fail("start_coset", "start_coset must be non-negative")
        return self

    def echo(self) -> dict[str, Any]:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[k] = v
        return out


_PARSERS: dict[str, Callable[[str], Any]] = {
    "genus": int,
    "metric": str,
    "matrix_file": str,
    "length_cutoff_max": float,
    "word_cutoff_max": int,
    "curve": str,
    "length_cutoff": float,
    "homology": _int_vector,
    "period": _real,
    "shift": _real,
    "cover": str,
    "start_coset": int,
    "max_stages": int,
    "max_index": int,
}

assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    values: dict[str, Any] = {}
    where: dict[str, tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        key_part, val_part = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        val_col = len(key_part) + 2 + (len(val_part) - len(val_part.lstrip()))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno, key_col)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key_col)
        text_val = val_part.strip()
        if len(text_val) >= 2 and text_val[0] == text_val[-1] == '"':
            text_val = text_val[1:-1]
        try:
            values[key] = _PARSERS[key](text_val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {text_val!r} ({exc})", lineno, val_col) from None
        where[key] = (lineno, val_col)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
            where.pop(k, None)
    return RunConfig(**values).validate(where)


def load_config(path: str | Path | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    if path is None:
        return parse_config("", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}", kind="io")
    return parse_config(p.read_text(), overrides)
