"""Declarative fixed-width record layouts.

Schema files are line oriented::

    # comment
    record_width 40
    age continuous 0 3 missing=999
    marital_status categorical 3 1 missing=9 categories=1,2,3,4,5,6,7

One field per line: ``name kind offset length`` followed by optional
``missing=...`` and ``categories=...`` clauses. Offsets and lengths are in
bytes; byte ranges of different fields may overlap (recode variables
overlay raw ones), but every range must fit inside ``record_width``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SchemaError

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"
KINDS = (CATEGORICAL, CONTINUOUS)


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str
    offset: int
    length: int
    missing_codes: tuple[str, ...] = ()
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"field {self.name!r}: unknown kind {self.kind!r}")
        if self.length < 1:
            raise SchemaError(f"field {self.name!r}: length must be >= 1")
        if self.offset < 0:
            raise SchemaError(f"field {self.name!r}: offset must be >= 0")
        if self.categories is not None:
            if self.kind != CATEGORICAL:
                raise SchemaError(f"field {self.name!r}: categories only allowed on categorical fields")
            clash = set(self.missing_codes) & set(self.categories)
            if clash:
                raise SchemaError(
                    f"field {self.name!r}: missing codes {sorted(clash)} also listed as categories"
                )

    @property
    def end(self) -> int:
        return self.offset + self.length


@dataclass(frozen=True)
class Schema:
    record_width: int
    fields: tuple[FieldSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.record_width < 1:
            raise SchemaError("record_width must be >= 1")
        seen = set()
        for f in self.fields:
            if f.name in seen:
                raise SchemaError(f"duplicate field name {f.name!r}")
            seen.add(f.name)
            if f.end > self.record_width:
                raise SchemaError(
                    f"field {f.name!r} ends at byte {f.end}, beyond record width {self.record_width}"
                )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def field_by_name(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise SchemaError(f"no field named {name!r}")


def _parse_codes(clause: str) -> tuple[str, ...]:
    return tuple(c for c in clause.split(",") if c != "")


def parse_schema(text: str) -> Schema:
    """Parse schema-file contents into a validated Schema.

    Raises SchemaError with line/column positions for syntax problems,
    duplicate names, and fields that exceed the record width.
    """
    record_width = None
    fields: list[FieldSpec] = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        if tokens[0] == "record_width":
            if record_width is not None:
                raise SchemaError("record_width declared twice", line=lineno)
            if fields:
                raise SchemaError("record_width must precede field lines", line=lineno)
            if len(tokens) != 2:
                raise SchemaError("expected: record_width N", line=lineno)
            try:
                record_width = int(tokens[1])
            except ValueError:
                raise SchemaError(f"record_width is not an integer: {tokens[1]!r}",
                                  line=lineno, column=line.index(tokens[1]) + 1) from None
            continue
        if record_width is None:
            raise SchemaError("missing record_width header line", line=lineno)
        if len(tokens) < 4:
            raise SchemaError("expected: name kind offset length [missing=...] [categories=...]",
                              line=lineno)
        name, kind = tokens[0], tokens[1]
        if kind not in KINDS:
            raise SchemaError(f"unknown kind {kind!r} (expected categorical or continuous)",
                              line=lineno, column=line.index(kind, len(name)) + 1)
        try:
            offset = int(tokens[2])
            length = int(tokens[3])
        except ValueError:
            raise SchemaError("offset and length must be integers", line=lineno) from None
        missing: tuple[str, ...] = ()
        categories = None
        for tok in tokens[4:]:
            if tok.startswith("missing="):
                missing = _parse_codes(tok[len("missing="):])
            elif tok.startswith("categories="):
                categories = _parse_codes(tok[len("categories="):])
            else:
                raise SchemaError(f"unrecognized clause {tok!r}",
                                  line=lineno, column=line.index(tok) + 1)
        if any(f.name == name for f in fields):
            raise SchemaError(f"duplicate field name {name!r}", line=lineno)
        try:
            spec = FieldSpec(name, kind, offset, length, missing, categories)
            if spec.end > record_width:
                raise SchemaError(
                    f"field {name!r} ends at byte {spec.end}, beyond record width {record_width}"
                )
        except SchemaError as exc:
            raise SchemaError(str(exc), line=lineno) from None
        fields.append(spec)
    if record_width is None:
        raise SchemaError("empty schema: missing record_width header")
    return Schema(record_width, tuple(fields))


def format_schema(schema: Schema) -> str:
    """Render a Schema back to schema-file text (inverse of parse_schema)."""
    lines = [f"record_width {schema.record_width}"]
    for f in schema.fields:
        parts = [f.name, f.kind, str(f.offset), str(f.length)]
        if f.missing_codes:
            parts.append("missing=" + ",".join(f.missing_codes))
        if f.categories is not None:
            parts.append("categories=" + ",".join(f.categories))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
