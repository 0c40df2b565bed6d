from __future__ import annotations

import os
from typing import Iterator


class CsvFormatError(ValueError):
    """Malformed row in one of the plain-text CSV formats."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def iter_rows(path, n_fields: int, header_first: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, fields) skipping blanks, ``#`` comments and an optional header.

    The header is recognized on the first data line by its first field.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    seen_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if not seen_data:
                seen_data = True
                if fields[0].lower() == header_first:
                    continue
            if len(fields) != n_fields:
                raise CsvFormatError(path, line_no,
                                     f"expected {n_fields} fields, got {len(fields)}")
            yield line_no, fields


def parse_number(path, line_no, text, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise CsvFormatError(path, line_no, f"not a number: {text!r}") from None
    if kind is float and value != value:
        raise CsvFormatError(path, line_no, "NaN is not allowed")
    return value


def fmt(v: float) -> str:
    # repr keeps round-trips exact
    return repr(float(v))
