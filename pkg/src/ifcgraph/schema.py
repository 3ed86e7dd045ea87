"""Positional-to-named attribute resolution for IFC entity types.

STEP records carry attributes positionally; this module maps each position to
the schema's attribute name (inheritance already flattened in the bundled
tables) and supplies the canonical mixed-case spelling of type names
(IFCDOOR -> IfcDoor). Unknown types fall back to positional names so lookup
is total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import MalformedTable, UnknownSchema

BUNDLED_SCHEMAS = ("IFC4", "IFC2X3")


@dataclass(frozen=True)
class SchemaTable:
    """Flattened attribute-name table for one IFC schema.

    ``attrs`` maps UPPERCASE entity type name to the ordered attribute names
    (supertype attributes first). ``casing`` maps UPPERCASE names (entity and
    defined/measure types alike) to their canonical mixed-case spelling.
    """

    schema_id: str
    attrs: dict[str, tuple[str, ...]] = field(default_factory=dict)
    casing: dict[str, str] = field(default_factory=dict)

    def attribute_names(self, type_name: str) -> tuple[str, ...] | None:
        return self.attrs.get(type_name.upper())

    def canonical_name(self, type_name: str) -> str:
        """Mixed-case spelling; title-cases the raw name when unknown."""
        return self.casing.get(type_name.upper(), type_name.title())

    def has_type(self, type_name: str) -> bool:
        return type_name.upper() in self.casing


def attribute_name(table: SchemaTable, type_name: str, position: int) -> str:
    """Name of the attribute at a 0-based position, or ``arg<position>``.

    Total: unknown types and out-of-range positions use the fallback.
    """
    if position < 0:
        raise ValueError("position must be >= 0")
    names = table.attrs.get(type_name.upper())
    if names is not None and position < len(names):
        return names[position]
    return f"arg{position}"


def parse_table(schema_id: str, table_source: str) -> SchemaTable:
    """Parse the record format: one type per line, name then attribute names.

    Lines starting with ``#`` and blank lines are skipped. A line with only a
    type name records casing without attributes (used for measure types).
    """
    attrs: dict[str, tuple[str, ...]] = {}
    casing: dict[str, str] = {}
    for lineno, raw in enumerate(table_source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        name = fields[0]
        key = name.upper()
        if key in casing:
            raise MalformedTable(lineno, f"duplicate type {name}")
        names = tuple(fields[1:])
        if len(set(names)) != len(names):
            raise MalformedTable(lineno, f"duplicate attribute name for {name}")
        casing[key] = name
        if names:
            attrs[key] = names
    return SchemaTable(schema_id, attrs, casing)


def load_schema(schema_id: str, table_source: str | None = None) -> SchemaTable:
    """Load a schema table, from the bundled data file unless source is given.

    Raises:
        UnknownSchema: no bundled table for ``schema_id``.
        MalformedTable: bad record in the table source.
    """
    sid = schema_id.upper()
    if table_source is None:
        name = f"{sid.lower()}.tbl"
        ref = resources.files("ifcgraph") / "schemas" / name
        if not ref.is_file():
            raise UnknownSchema(schema_id)
        table_source = ref.read_text(encoding="utf-8")
    return parse_table(sid, table_source)


def pick_schema_id(schema_ids: tuple[str, ...], override: str | None = None) -> str:
    """Choose the schema for a file: explicit override, else FILE_SCHEMA.

    FILE_SCHEMA values sometimes carry suffixes (``IFC2X3_TC1``); the longest
    bundled id that prefixes the declared value wins. Defaults to IFC4.
    """
    if override:
        return override.upper()
    for declared in schema_ids:
        d = declared.upper()
        for candidate in sorted(BUNDLED_SCHEMAS, key=len, reverse=True):
            if d.startswith(candidate):
                return candidate
    return "IFC4"
