"""AST for the supported Cypher subset."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class NodePattern:
    var: str | None
    label: str | None


@dataclass(frozen=True, slots=True)
class RelPattern:
    var: str | None
    rel_type: str | None


# --- value expressions ---


@dataclass(frozen=True, slots=True)
class Prop:
    var: str
    name: str

    def source(self) -> str:
        return f"{self.var}.{self.name}"


@dataclass(frozen=True, slots=True)
class Lit:
    value: str | int | float


@dataclass(frozen=True, slots=True)
class ToLower:
    expr: "Prop | Lit | ToLower"


# --- predicates ---


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str  # "CONTAINS" | "=" | ">"
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class And:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Not:
    operand: object


# --- RETURN ---


@dataclass(frozen=True, slots=True)
class Count:
    var: str

    def source(self) -> str:
        return f"COUNT({self.var})"


@dataclass(frozen=True, slots=True)
class AggCompare:
    count: Count
    threshold: float

    def source(self) -> str:
        num = int(self.threshold) if self.threshold == int(self.threshold) else self.threshold
        return f"{self.count.source()} > {num}"


@dataclass(frozen=True, slots=True)
class ReturnItem:
    expr: Prop | Count | AggCompare
    alias: str | None

    @property
    def column(self) -> str:
        return self.alias if self.alias is not None else self.expr.source()

    @property
    def is_aggregate(self) -> bool:
        return isinstance(self.expr, (Count, AggCompare))


@dataclass(frozen=True, slots=True)
class Query:
    pattern: tuple  # NodePattern, RelPattern, NodePattern, ... (odd length)
    where: object | None
    returns: tuple[ReturnItem, ...]
    limit: int | None = None

    @property
    def node_patterns(self) -> tuple[NodePattern, ...]:
        return self.pattern[0::2]

    @property
    def rel_patterns(self) -> tuple[RelPattern, ...]:
        return self.pattern[1::2]

    @property
    def is_aggregate(self) -> bool:
        return self.returns[0].is_aggregate
