"""Decode fixed-width ASCII records and delimited text into raw datasets.

A raw dataset keeps every cell as the trimmed source string, or None for
missing; typing happens later in :mod:`survpipe.dataset`. A cell is missing
when the extracted substring is entirely blank or equals one of the field's
declared missing codes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .schema import Schema


@dataclass(frozen=True)
class RawDataset:
    schema: Schema
    columns: tuple[np.ndarray, ...]  # one object array of (str | None) per schema field

    def __post_init__(self):
        if len(self.columns) != len(self.schema.fields):
            raise ValidationError("raw dataset must have exactly one column per schema field")
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise ValidationError("raw dataset columns have unequal lengths")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.schema.names.index(name)]

    def cell(self, row: int, name: str):
        return self.column(name)[row]


def _cells_to_columns(schema: Schema, rows: list[tuple]) -> RawDataset:
    n_fields = len(schema.fields)
    cols = []
    for j in range(n_fields):
        col = np.empty(len(rows), dtype=object)
        for i, row in enumerate(rows):
            col[i] = row[j]
        cols.append(col)
    return RawDataset(schema, tuple(cols))


def _decode_cell(segment: bytes, missing_codes: tuple[str, ...], lineno: int, name: str) -> str | None:
    if any(b >= 128 for b in segment):
        raise ParseError(f"line {lineno}: non-ASCII byte in field {name!r}")
    text = segment.decode("ascii").strip()
    if text == "" or text in missing_codes:
        return None
    return text


def parse_fixed_width(lines, schema: Schema) -> RawDataset:
    """Slice fixed-width records into a RawDataset.

    `lines` is an iterable of bytes or str records (no trailing newline
    handling required; CR/LF are stripped). Every record must be at least
    ``schema.record_width`` bytes; trailing excess is ignored.
    """
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if isinstance(line, str):
            line = line.encode("latin-1")
        line = line.rstrip(b"\r\n")
        if len(line) < schema.record_width:
            raise ParseError(
                f"line {lineno}: record is {len(line)} bytes, schema requires {schema.record_width}"
            )
        row = tuple(
            _decode_cell(line[f.offset:f.end], f.missing_codes, lineno, f.name)
            for f in schema.fields
        )
        rows.append(row)
    return _cells_to_columns(schema, rows)


def parse_fixed_width_bytes(data: bytes, schema: Schema) -> RawDataset:
    """Split a whole fixed-width file on newlines and parse it."""
    lines = data.splitlines()
    return parse_fixed_width(lines, schema)


def read_delimited(text: str, schema: Schema) -> RawDataset:
    """Read the comma-delimited form back into a RawDataset.

    The header row must contain exactly the schema's field names (any
    order). Empty fields are missing. Values never contain commas, so no
    quoting is involved.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("delimited input has no header row")
    header = lines[0].split(",")
    if set(header) != set(schema.names):
        unknown = sorted(set(header) - set(schema.names))
        absent = sorted(set(schema.names) - set(header))
        detail = []
        if unknown:
            detail.append(f"unknown columns {unknown}")
        if absent:
            detail.append(f"missing columns {absent}")
        raise ParseError("header does not match schema: " + "; ".join(detail))
    if len(set(header)) != len(header):
        raise ParseError("header repeats a column name")
    # reorder incoming columns into schema field order
    source_index = [header.index(name) for name in schema.names]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, found {len(cells)}")
        rows.append(tuple(cells[j] if cells[j] != "" else None for j in source_index))
    return _cells_to_columns(schema, rows)


def write_delimited(dataset: RawDataset) -> str:
    """Serialize a RawDataset to its comma-delimited form (read_delimited inverse)."""
    names = dataset.schema.names
    out = [",".join(names)]
    for i in range(dataset.n_rows):
        cells = []
        for col in dataset.columns:
            value = col[i]
            if value is None:
                cells.append("")
            else:
                if "," in value or "\n" in value or "\r" in value:
                    raise ValidationError(f"cell value {value!r} contains a delimiter byte")
                cells.append(value)
        out.append(",".join(cells))
    return "\n".join(out) + "\n"
