"""In-memory labeled property multigraph over IFC entities.

Nodes carry the entity's canonical type name as label, the ``#N`` id, and the
named non-reference parameters as attributes. Edges are undirected, labeled
with the referencing attribute's name, and parallel edges are kept (one per
reference occurrence). A :class:`GraphBuilder` is mutable; ``freeze()``
yields an immutable :class:`PropertyGraph` safe for concurrent readers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .errors import DuplicateEntity, UnknownNode

# Attribute values are plain Python scalars (int, float, str, bool, None),
# lists of those, or a TypedValue wrapper for measure-typed parameters.
AttrValue = object


@dataclass(frozen=True, slots=True)
class TypedValue:
    """A measure-typed attribute, e.g. IfcLabel("Level: Ground Floor")."""

    type_name: str
    value: object
    # Source lexeme of a real inner value ("1000.") for faithful rendering.
    text: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.type_name}({render_value(self.value, inner_text=self.text)})"


def unwrap(value: object) -> object:
    """Strip a TypedValue wrapper for comparisons; rendering keeps it."""
    if isinstance(value, TypedValue):
        return value.value
    return value


def render_value(value: object, inner_text: str = "") -> str:
    """Canonical single-line rendering used in contexts and CSV cells.

    Integers bare, booleans ``true``/``false``, strings double-quoted,
    missing values ``null``, typed values ``TypeName(...)`` with the source
    real lexeme preserved.
    """
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if inner_text:
            return inner_text
        s = repr(value)
        return s
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, TypedValue):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_value(v) for v in value) + "]"
    raise TypeError(f"unrenderable attribute value: {value!r}")


def render_attr_map(attrs: dict[str, object]) -> str:
    """Render an attribute map as ``{'Name': "Haustuer", ...}``."""
    parts = ", ".join(f"'{k}': {render_value(v)}" for k, v in attrs.items())
    return "{" + parts + "}"


@dataclass(frozen=True, slots=True)
class Node:
    node_key: int
    entity_id: int
    label: str
    attrs: dict[str, object]


@dataclass(frozen=True, slots=True)
class Edge:
    edge_key: int
    a: int
    b: int
    label: str

    def other(self, node_key: int) -> int:
        return self.b if node_key == self.a else self.a


class GraphBuilder:
    """Single-owner mutable graph under construction."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.by_entity: dict[int, int] = {}
        self.by_label: dict[str, list[int]] = {}
        self.adjacency: list[list[int]] = []

    def add_node(self, entity_id: int, label: str, attrs: dict[str, object]) -> int:
        if entity_id in self.by_entity:
            raise DuplicateEntity(entity_id)
        if not label:
            raise ValueError("node label must be non-empty")
        key = len(self.nodes)
        self.nodes.append(Node(key, entity_id, label, attrs))
        self.by_entity[entity_id] = key
        self.by_label.setdefault(label, []).append(key)
        self.adjacency.append([])
        return key

    def add_edge(self, a: int, b: int, label: str) -> int:
        if not 0 <= a < len(self.nodes):
            raise UnknownNode(a)
        if not 0 <= b < len(self.nodes):
            raise UnknownNode(b)
        key = len(self.edges)
        self.edges.append(Edge(key, a, b, label))
        self.adjacency[a].append(key)
        if b != a:
            self.adjacency[b].append(key)
        return key

    def freeze(self) -> "PropertyGraph":
        return PropertyGraph(
            tuple(self.nodes),
            tuple(self.edges),
            dict(self.by_entity),
            {label: tuple(keys) for label, keys in self.by_label.items()},
            tuple(tuple(adj) for adj in self.adjacency),
        )


@dataclass(frozen=True, slots=True)
class PropertyGraph:
    """Immutable graph; all reads are pure and safe to share across threads."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    by_entity: dict[int, int]
    by_label: dict[str, tuple[int, ...]]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_by_entity(self, entity_id: int) -> Node | None:
        key = self.by_entity.get(entity_id)
        return self.nodes[key] if key is not None else None

    def nodes_with_label(self, label: str) -> tuple[int, ...]:
        return self.by_label.get(label, ())

    def neighbors(
        self, node_key: int, edge_label: str | None = None
    ) -> list[tuple[int, int]]:
        """Incident (edge_key, other node_key) pairs, ascending edge_key.

        Undirected: every incident edge is visible regardless of which
        endpoint the reference came from. Self-loops appear once.
        """
        if not 0 <= node_key < len(self.nodes):
            raise UnknownNode(node_key)
        out: list[tuple[int, int]] = []
        for ek in self.adjacency[node_key]:
            edge = self.edges[ek]
            if edge_label is not None and edge.label != edge_label:
                continue
            out.append((ek, edge.other(node_key)))
        return out

    def stats(self) -> dict:
        labels: dict[str, int] = {}
        for node in self.nodes:
            labels[node.label] = labels.get(node.label, 0) + 1
        edge_labels: dict[str, int] = {}
        for edge in self.edges:
            edge_labels[edge.label] = edge_labels.get(edge.label, 0) + 1
        return {
            "node_count": len(self.nodes),
            "edge_count": len(self.edges),
            "label_histogram": dict(sorted(labels.items())),
            "edge_label_histogram": dict(sorted(edge_labels.items())),
        }

    def export_csv(self, node_sink, edge_sink, neo4j_headers: bool = False) -> tuple[int, int]:
        """Write node and edge lists as RFC 4180 CSV (UTF-8, \\n endings).

        Node columns: id,label,attributes (attributes as one rendered cell).
        Edge columns: src,dst,label, using entity ids. With ``neo4j_headers``
        the header rows carry importer typing.
        """
        nw = csv.writer(node_sink, lineterminator="\n")
        if neo4j_headers:
            nw.writerow(["id:ID", ":LABEL", "attributes"])
        else:
            nw.writerow(["id", "label", "attributes"])
        for node in self.nodes:
            nw.writerow([node.entity_id, node.label, render_attr_map(node.attrs)])

        ew = csv.writer(edge_sink, lineterminator="\n")
        if neo4j_headers:
            ew.writerow(["src:START_ID", "dst:END_ID", ":TYPE"])
        else:
            ew.writerow(["src", "dst", "label"])
        for edge in self.edges:
            ew.writerow(
                [
                    self.nodes[edge.a].entity_id,
                    self.nodes[edge.b].entity_id,
                    edge.label,
                ]
            )
        return len(self.nodes), len(self.edges)
