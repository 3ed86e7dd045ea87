"""Backtracking evaluation of subset queries over a frozen property graph."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import QueryBudgetExceeded
from ..graph import PropertyGraph, TypedValue, render_value, unwrap
from .ast import AggCompare, And, Cmp, Count, Lit, Not, Or, Prop, Query, ToLower

DEFAULT_BUDGET = 10_000_000


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[dict]

    def __len__(self) -> int:
        return len(self.rows)


def _numeric(value):
    """Coerce to float for ordering comparisons; None when not numeric."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


def _eval_value(expr, nodes_by_var: dict):
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Prop):
        node = nodes_by_var.get(expr.var)
        if node is None:
            return None  # relationship variable: edges carry no properties
        return node.attrs.get(expr.name)
    if isinstance(expr, ToLower):
        value = unwrap(_eval_value(expr.expr, nodes_by_var))
        if isinstance(value, str):
            return value.lower()
        return None
    raise TypeError(f"unexpected value expression: {expr!r}")


def _eval_predicate(pred, nodes_by_var: dict) -> bool:
    if isinstance(pred, And):
        return _eval_predicate(pred.left, nodes_by_var) and _eval_predicate(
            pred.right, nodes_by_var
        )
    if isinstance(pred, Or):
        return _eval_predicate(pred.left, nodes_by_var) or _eval_predicate(
            pred.right, nodes_by_var
        )
    if isinstance(pred, Not):
        return not _eval_predicate(pred.operand, nodes_by_var)
    if isinstance(pred, Cmp):
        left = unwrap(_eval_value(pred.left, nodes_by_var))
        right = unwrap(_eval_value(pred.right, nodes_by_var))
        if left is None or right is None:
            return False
        if pred.op == "CONTAINS":
            return isinstance(left, str) and isinstance(right, str) and right in left
        if pred.op == "=":
            ln, rn = _numeric(left), _numeric(right)
            if ln is not None and rn is not None:
                return ln == rn
            return type(left) is type(right) and left == right
        if pred.op == ">":
            ln, rn = _numeric(left), _numeric(right)
            if ln is None or rn is None:
                return False
            return ln > rn
    raise TypeError(f"unexpected predicate: {pred!r}")


def execute(query: Query, graph: PropertyGraph, budget: int = DEFAULT_BUDGET) -> ResultTable:
    """Evaluate a parsed query.

    Pattern semantics: undirected traversal, exact label and relationship-type
    match, relationship uniqueness within one path match, repeated node
    variables bind the same node. Missing properties evaluate to null; null
    never satisfies a comparison. Row order is deterministic: lexicographic
    over the bound nodes' entity ids in pattern order, then edge keys.

    Raises:
        QueryBudgetExceeded: more than ``budget`` binding extensions.
    """
    node_pats = query.node_patterns
    rel_pats = query.rel_patterns
    n_steps = len(node_pats)
    steps_left = budget

    # One match = (node_keys per pattern position, edge_keys per rel position)
    matches: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def var_conflict(var, key, bound_nodes, upto):
        if var is None:
            return False
        for j in range(upto):
            if node_pats[j].var == var and bound_nodes[j] != key:
                return True
        return False

    def extend(i: int, bound_nodes: list[int], bound_edges: list[int], used: set[int]):
        nonlocal steps_left
        if i == n_steps:
            matches.append((tuple(bound_nodes), tuple(bound_edges)))
            return
        pat = node_pats[i]
        if i == 0:
            candidates = (
                graph.nodes_with_label(pat.label)
                if pat.label is not None
                else range(len(graph.nodes))
            )
            for key in candidates:
                steps_left -= 1
                if steps_left < 0:
                    raise QueryBudgetExceeded(budget)
                bound_nodes.append(key)
                extend(1, bound_nodes, bound_edges, used)
                bound_nodes.pop()
            return
        rel = rel_pats[i - 1]
        current = bound_nodes[-1]
        for edge_key, other in graph.neighbors(current, rel.rel_type):
            steps_left -= 1
            if steps_left < 0:
                raise QueryBudgetExceeded(budget)
            if edge_key in used:
                continue
            node = graph.nodes[other]
            if pat.label is not None and node.label != pat.label:
                continue
            if var_conflict(pat.var, other, bound_nodes, i):
                continue
            if rel.var is not None:
                # A repeated relationship variable can never bind two distinct
                # edges, and uniqueness forbids reusing one: no match.
                if any(
                    rel_pats[j].var == rel.var and bound_edges[j] != edge_key
                    for j in range(i - 1)
                ):
                    continue
            used.add(edge_key)
            bound_nodes.append(other)
            bound_edges.append(edge_key)
            extend(i + 1, bound_nodes, bound_edges, used)
            bound_edges.pop()
            bound_nodes.pop()
            used.discard(edge_key)

    extend(0, [], [], set())

    # Deterministic order before WHERE so LIMIT prefixes are stable.
    matches.sort(
        key=lambda m: (tuple(graph.nodes[k].entity_id for k in m[0]), m[1])
    )

    surviving: list[dict] = []
    for bound_nodes, bound_edges in matches:
        nodes_by_var: dict = {}
        for pat, key in zip(node_pats, bound_nodes):
            if pat.var is not None:
                nodes_by_var[pat.var] = graph.nodes[key]
        if query.where is not None and not _eval_predicate(query.where, nodes_by_var):
            continue
        surviving.append(nodes_by_var)

    columns = [item.column for item in query.returns]

    if query.is_aggregate:
        count = len(surviving)
        row: dict = {}
        for item in query.returns:
            if isinstance(item.expr, Count):
                row[item.column] = count
            else:
                assert isinstance(item.expr, AggCompare)
                row[item.column] = count > item.expr.threshold
        rows = [row]
    else:
        rows = []
        for nodes_by_var in surviving:
            row = {}
            for item in query.returns:
                assert isinstance(item.expr, Prop)
                row[item.column] = _eval_value(item.expr, nodes_by_var)
            rows.append(row)

    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(columns, rows)


def _render_cell(value) -> str:
    if isinstance(value, TypedValue):
        return str(value)
    return render_value(value)


def render_context(table: ResultTable) -> str:
    """Canonical single-line context string handed to answer generation.

    Each row renders as ``{'column': value, ...}``; a single row is rendered
    without the outer list brackets; an empty table renders as ``[]``.
    """
    if not table.rows:
        return "[]"
    rendered = [
        "{" + ", ".join(f"'{col}': {_render_cell(row[col])}" for col in table.columns) + "}"
        for row in table.rows
    ]
    if len(rendered) == 1:
        return rendered[0]
    return "[" + ", ".join(rendered) + "]"


def context_is_empty(context: str, table: ResultTable | None = None) -> bool:
    """True when a context carries no usable values (no rows or all null)."""
    if table is not None:
        return not table.rows or all(
            all(value is None for value in row.values()) for row in table.rows
        )
    return context.strip() == "[]"
