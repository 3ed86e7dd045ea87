"""Read-only Cypher subset: linear undirected MATCH paths, WHERE predicates,
RETURN with property access / COUNT / boolean aggregate, optional LIMIT.

The grammar is published in docs/cypher-subset.ebnf and is part of the
artifact's compatibility contract.
"""

from .ast import (
    AggCompare,
    Cmp,
    Count,
    Lit,
    NodePattern,
    Prop,
    Query,
    RelPattern,
    ReturnItem,
    ToLower,
)
from .engine import ResultTable, execute, render_context
from .parser import parse_query

__all__ = [
    "AggCompare",
    "Cmp",
    "Count",
    "Lit",
    "NodePattern",
    "Prop",
    "Query",
    "RelPattern",
    "ReturnItem",
    "ToLower",
    "ResultTable",
    "execute",
    "render_context",
    "parse_query",
]
