"""Readers for set corpora.

``lines``: one set per line, whitespace-separated non-negative integers with
an optional leading ``id:`` token::

    doc1: 3 17 42
    5 6 7

``sparse-index``: LibSVM-style ``label idx:val idx:val ...``; an index is a
member when its value is nonzero::

    +1 3:1 17:0.5 42:1

Blank lines and lines starting with ``#`` are skipped. Sets without an
explicit id are named after their line number.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Optional

from .core import SetRecord, ValidationError

FORMATS = ("lines", "sparse-index")
_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")


class CorpusParseError(ValidationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _parse_int(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise CorpusParseError(lineno, f"not an integer: {token!r}") from None
    if value < 0:
        raise CorpusParseError(lineno, f"negative element {value}")
    return value


def _parse_lines_row(line: str, lineno: int) -> tuple:
    tokens = line.split()
    set_id = str(lineno)
    if tokens and tokens[0].endswith(":"):
        set_id = tokens[0][:-1]
        tokens = tokens[1:]
    return set_id, [_parse_int(t, lineno) for t in tokens]


def _parse_sparse_row(line: str, lineno: int) -> tuple:
    tokens = line.split()
    elements = []
    for tok in tokens[1:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise CorpusParseError(lineno, f"expected idx:val, got {tok!r}")
        try:
            nonzero = float(val) != 0.0
        except ValueError:
            raise CorpusParseError(lineno, f"bad value in {tok!r}") from None
        if nonzero:
            elements.append(_parse_int(idx, lineno))
    return str(lineno), elements


def parse_corpus(lines: Iterable[str], fmt: str, universe: Optional[int] = None) -> list:
    """Parse corpus text into :class:`SetRecord` objects (in file order)."""
    if fmt not in FORMATS:
        raise ValidationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    parse_row = _parse_lines_row if fmt == "lines" else _parse_sparse_row
    records = []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        set_id, elements = parse_row(line, lineno)
        if not _ID_RE.match(set_id):
            raise CorpusParseError(lineno, f"invalid set id {set_id!r}")
        if set_id in seen:
            raise CorpusParseError(lineno, f"duplicate set id {set_id!r}")
        if not elements:
            raise CorpusParseError(lineno, "empty set")
        try:
            records.append(SetRecord.from_iterable(set_id, elements, universe))
        except ValidationError as exc:
            raise CorpusParseError(lineno, str(exc)) from None
        seen.add(set_id)
    return records


def read_corpus(path, fmt: str, universe: Optional[int] = None) -> list:
    with Path(path).open("r", encoding="utf-8") as fh:
        return parse_corpus(fh, fmt, universe)
