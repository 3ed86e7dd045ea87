"""Stage 1: transform a parsed STEP file into a property graph.

One node per DATA entity; one undirected edge per entity-reference occurrence,
labeled with the referencing attribute's name. Two passes so forward
references resolve regardless of id order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import step
from .errors import UnresolvedReference
from .graph import GraphBuilder, PropertyGraph, TypedValue
from .schema import SchemaTable, attribute_name, load_schema, pick_schema_id

UNRESOLVED_LABEL = "Unresolved"


@dataclass(frozen=True)
class BuildOptions:
    mode: str = "lenient"  # "lenient" | "strict"
    schema_override: str | None = None


@dataclass
class BuildReport:
    node_count: int = 0
    edge_count: int = 0
    unresolved_refs: list[tuple[int, str, int]] = field(default_factory=list)
    unknown_types: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "unresolved_refs": [
                {"from": f, "attribute": a, "missing": m}
                for f, a, m in self.unresolved_refs
            ],
            "unknown_types": sorted(self.unknown_types),
        }


def _convert_scalar(param: step.ParamValue, schema: SchemaTable):
    """Convert one non-reference parameter to an attribute value.

    Returns the sentinel ``None`` for values that carry no attribute
    (references, unset/derived markers).
    """
    if isinstance(param, step.Text):
        return param.value
    if isinstance(param, step.Real):
        return param.value
    if isinstance(param, step.Integer):
        return param.value
    if isinstance(param, step.Boolean):
        return param.value
    if isinstance(param, step.Enum):
        return param.symbol
    if isinstance(param, step.Typed):
        inner = _convert_scalar(param.inner, schema)
        if inner is None:
            return None
        text = param.inner.lexeme() if isinstance(param.inner, step.Real) else ""
        return TypedValue(schema.canonical_name(param.type_name), inner, text)
    if isinstance(param, step.Aggregate):
        scalars = [
            v
            for item in param.items
            if (v := _convert_scalar(item, schema)) is not None
        ]
        if not scalars and any(_has_ref(item) for item in param.items):
            return None
        return scalars
    return None  # Unset, Derived, EntityRef


def _has_ref(param: step.ParamValue) -> bool:
    if isinstance(param, step.EntityRef):
        return True
    if isinstance(param, step.Aggregate):
        return any(_has_ref(x) for x in param.items)
    if isinstance(param, step.Typed):
        return _has_ref(param.inner)
    return False


def _collect_refs(param: step.ParamValue, out: list[int]) -> None:
    """Entity-reference targets in textual order, at any nesting depth."""
    if isinstance(param, step.EntityRef):
        out.append(param.target)
    elif isinstance(param, step.Aggregate):
        for item in param.items:
            _collect_refs(item, out)
    elif isinstance(param, step.Typed):
        _collect_refs(param.inner, out)


def node_attributes(entity: step.EntityInstance, schema: SchemaTable) -> dict:
    """Named scalar attributes of one entity; references become edges instead."""
    attrs: dict[str, object] = {}
    for pos, param in enumerate(entity.params):
        value = _convert_scalar(param, schema)
        if value is None:
            continue
        attrs[attribute_name(schema, entity.type_name, pos)] = value
    return attrs


def build_graph(
    file: step.SourceFile,
    schema: SchemaTable,
    opts: BuildOptions = BuildOptions(),
) -> tuple[PropertyGraph, BuildReport]:
    """Build the property graph for a parsed file.

    Lenient mode creates placeholder nodes (label ``Unresolved``) for dangling
    references; strict mode raises :class:`UnresolvedReference`.
    """
    builder = GraphBuilder()
    report = BuildReport()

    for entity in file.entities:
        if schema.attribute_names(entity.type_name) is None:
            report.unknown_types.add(entity.type_name)
        label = schema.canonical_name(entity.type_name)
        builder.add_node(entity.id, label, node_attributes(entity, schema))

    for entity in file.entities:
        from_key = builder.by_entity[entity.id]
        for pos, param in enumerate(entity.params):
            targets: list[int] = []
            _collect_refs(param, targets)
            if not targets:
                continue
            attr = attribute_name(schema, entity.type_name, pos)
            for target in targets:
                to_key = builder.by_entity.get(target)
                if to_key is None:
                    if opts.mode == "strict":
                        raise UnresolvedReference(entity.id, attr, target)
                    report.unresolved_refs.append((entity.id, attr, target))
                    to_key = builder.add_node(target, UNRESOLVED_LABEL, {})
                builder.add_edge(from_key, to_key, attr)

    graph = builder.freeze()
    report.node_count = graph.node_count
    report.edge_count = graph.edge_count
    return graph, report


def build_from_source(
    file: step.SourceFile, opts: BuildOptions = BuildOptions()
) -> tuple[PropertyGraph, BuildReport, SchemaTable]:
    """Pick the schema from FILE_SCHEMA (or the override) and build."""
    schema_id = pick_schema_id(file.header.schema_ids, opts.schema_override)
    schema = load_schema(schema_id)
    graph, report = build_graph(file, schema, opts)
    return graph, report, schema


def build_from_path(
    path: str, opts: BuildOptions = BuildOptions()
) -> tuple[PropertyGraph, BuildReport, SchemaTable]:
    return build_from_source(step.read_ifc(path), opts)
