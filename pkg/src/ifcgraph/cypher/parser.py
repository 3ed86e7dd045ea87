"""Recursive-descent parser for the Cypher subset.

Keywords are case-insensitive; identifiers are case-sensitive. Recognized
Cypher that falls outside the subset raises :class:`UnsupportedFeature` so the
orchestrator can phrase a targeted retry; anything else is a plain
:class:`CypherSyntaxError`.
"""

from __future__ import annotations

import re

from ..errors import CypherSyntaxError, UnboundVariable, UnsupportedFeature
from .ast import (
    AggCompare,
    And,
    Cmp,
    Count,
    Lit,
    NodePattern,
    Not,
    Or,
    Prop,
    Query,
    RelPattern,
    ReturnItem,
    ToLower,
)

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>//[^\n]*)
    | (?P<NUMBER>\d+(?:\.\d+)?)
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<SQ>'(?:\\.|[^'\\])*')
    | (?P<DQ>"(?:\\.|[^"\\])*")
    | (?P<ARROW><-|->)
    | (?P<NEQ><>)
    | (?P<PUNCT>[()\[\]\-:,.=><*{}|+/])
    """,
    re.VERBOSE,
)

# Recognizable Cypher keywords we deliberately do not support.
_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "WITH", "ORDER", "SKIP", "DISTINCT", "CREATE", "MERGE",
    "DELETE", "DETACH", "SET", "REMOVE", "UNION", "UNWIND", "CALL", "CASE",
    "EXISTS", "FOREACH", "STARTS", "ENDS", "IN", "IS", "XOR",
}

_KEYWORDS = {
    "MATCH", "WHERE", "RETURN", "AS", "AND", "OR", "NOT", "CONTAINS",
    "COUNT", "TOLOWER", "LIMIT", "TRUE", "FALSE", "NULL",
} | _UNSUPPORTED_KEYWORDS


def _unescape(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind  # IDENT, KEYWORD, NUMBER, STRING, or the punct itself
        self.text = text
        self.pos = pos


def _lex(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CypherSyntaxError(pos, f"a valid token (got {text[pos]!r})")
        kind = m.lastgroup
        value = m.group()
        start = pos
        pos = m.end()
        if kind in ("WS", "COMMENT"):
            continue
        if kind == "NUMBER":
            tokens.append(_Tok("NUMBER", value, start))
        elif kind == "IDENT":
            upper = value.upper()
            if upper in _KEYWORDS:
                tokens.append(_Tok("KEYWORD", upper, start))
            else:
                tokens.append(_Tok("IDENT", value, start))
        elif kind in ("SQ", "DQ"):
            tokens.append(_Tok("STRING", _unescape(value), start))
        elif kind == "ARROW":
            raise UnsupportedFeature(value, "directed relationships; use -[..]-")
        elif kind == "NEQ":
            raise UnsupportedFeature("<>", "only CONTAINS, = and > are supported")
        else:
            tokens.append(_Tok(value, value, start))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0

    def peek(self) -> _Tok | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, expected: str) -> CypherSyntaxError:
        tok = self.peek()
        pos = tok.pos if tok else len(self.text)
        return CypherSyntaxError(pos, expected)

    def take(self, kind: str | None = None, expected: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None or (kind is not None and tok.kind != kind):
            raise self.error(expected or kind or "more input")
        self.i += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "KEYWORD" and tok.text == word

    def take_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise self.error(word)
        self.i += 1

    def check_unsupported_keyword(self) -> None:
        tok = self.peek()
        if tok is not None and tok.kind == "KEYWORD" and tok.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(tok.text)

    # --- grammar ---

    def parse(self) -> Query:
        self.check_unsupported_keyword()
        self.take_keyword("MATCH")
        pattern = self.parse_pattern()
        where = None
        self.check_unsupported_keyword()
        if self.at_keyword("WHERE"):
            self.i += 1
            where = self.parse_or()
        self.check_unsupported_keyword()
        self.take_keyword("RETURN")
        self.check_unsupported_keyword()
        items = [self.parse_return_item()]
        while self.peek() is not None and self.peek().kind == ",":
            self.i += 1
            items.append(self.parse_return_item())
        limit = None
        if self.at_keyword("LIMIT"):
            self.i += 1
            tok = self.take("NUMBER", "a positive integer after LIMIT")
            if "." in tok.text or int(tok.text) < 1:
                raise CypherSyntaxError(tok.pos, "a positive integer after LIMIT")
            limit = int(tok.text)
        tok = self.peek()
        if tok is not None:
            self.check_unsupported_keyword()
            if tok.kind == ",":
                raise UnsupportedFeature(",", "multiple MATCH patterns")
            raise self.error("end of query")

        aggs = [it.is_aggregate for it in items]
        if any(aggs) and not all(aggs):
            raise UnsupportedFeature(
                "mixed RETURN", "aggregates cannot be mixed with plain items"
            )
        query = Query(tuple(pattern), where, tuple(items), limit)
        self._check_bound(query)
        return query

    def parse_pattern(self) -> list:
        steps: list = [self.parse_node_pattern()]
        while self.peek() is not None and self.peek().kind == "-":
            steps.append(self.parse_rel_pattern())
            steps.append(self.parse_node_pattern())
        return steps

    def parse_node_pattern(self) -> NodePattern:
        self.take("(", "'(' starting a node pattern")
        var = None
        label = None
        tok = self.peek()
        if tok is not None and tok.kind == "IDENT":
            var = tok.text
            self.i += 1
            tok = self.peek()
        if tok is not None and tok.kind == ":":
            self.i += 1
            label = self.take("IDENT", "a node label").text
        self.take(")", "')' closing the node pattern")
        return NodePattern(var, label)

    def parse_rel_pattern(self) -> RelPattern:
        self.take("-")
        tok = self.peek()
        if tok is not None and tok.kind == "[":
            self.i += 1
            var = None
            rel_type = None
            tok = self.peek()
            if tok is not None and tok.kind == "IDENT":
                var = tok.text
                self.i += 1
                tok = self.peek()
            if tok is not None and tok.kind == ":":
                self.i += 1
                rel_type = self.take("IDENT", "a relationship type").text
            tok = self.peek()
            if tok is not None and tok.kind == "*":
                raise UnsupportedFeature("*", "variable-length paths")
            self.take("]", "']' closing the relationship pattern")
            self.take("-", "'-' after the relationship pattern")
            # The node-rel-node alternation is strict: adjacent bracket pairs
            # (as printed in some sources) are not a valid linear path.
            tok = self.peek()
            if tok is not None and tok.kind == "[":
                raise UnsupportedFeature(
                    "-[..]-[..]-", "adjacent relationship patterns; alternate nodes and relationships"
                )
            return RelPattern(var, rel_type)
        if tok is not None and tok.kind == "-":
            self.i += 1
            return RelPattern(None, None)
        raise self.error("a relationship pattern '-[..]-' or '--'")

    # --- predicates ---

    def parse_or(self):
        left = self.parse_and()
        while self.at_keyword("OR"):
            self.i += 1
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at_keyword("AND"):
            self.i += 1
            left = And(left, self.parse_not())
        return left

    def parse_not(self):
        if self.at_keyword("NOT"):
            self.i += 1
            return Not(self.parse_not())
        tok = self.peek()
        if tok is not None and tok.kind == "(":
            self.i += 1
            inner = self.parse_or()
            self.take(")", "')' closing the grouped predicate")
            return inner
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_value()
        tok = self.peek()
        if tok is None:
            raise self.error("a comparison operator")
        if tok.kind == "KEYWORD" and tok.text == "CONTAINS":
            self.i += 1
            right = self.parse_value()
            for operand in (left, right):
                if isinstance(operand, Lit) and not isinstance(operand.value, str):
                    raise CypherSyntaxError(tok.pos, "string operands for CONTAINS")
            return Cmp("CONTAINS", left, right)
        if tok.kind == "=":
            self.i += 1
            return Cmp("=", left, self.parse_value())
        if tok.kind == ">":
            self.i += 1
            return Cmp(">", left, self.parse_value())
        if tok.kind == "<":
            raise UnsupportedFeature("<", "only CONTAINS, = and > are supported")
        raise self.error("CONTAINS, = or >")

    def parse_value(self):
        tok = self.peek()
        if tok is None:
            raise self.error("a value expression")
        if tok.kind == "STRING":
            self.i += 1
            return Lit(tok.text)
        if tok.kind == "NUMBER":
            self.i += 1
            return Lit(float(tok.text) if "." in tok.text else int(tok.text))
        if tok.kind == "-":
            self.i += 1
            num = self.take("NUMBER", "a number after unary minus")
            return Lit(-float(num.text) if "." in num.text else -int(num.text))
        if tok.kind == "KEYWORD" and tok.text == "TOLOWER":
            self.i += 1
            self.take("(", "'(' after toLower")
            inner = self.parse_value()
            if isinstance(inner, Lit) and not isinstance(inner.value, str):
                raise CypherSyntaxError(tok.pos, "a string operand for toLower")
            self.take(")", "')' closing toLower")
            return ToLower(inner)
        if tok.kind == "KEYWORD" and tok.text in ("TRUE", "FALSE"):
            raise UnsupportedFeature(tok.text.lower(), "boolean literals")
        if tok.kind == "KEYWORD" and tok.text == "COUNT":
            raise UnsupportedFeature("COUNT", "aggregates are only allowed in RETURN")
        if tok.kind == "IDENT":
            self.i += 1
            nxt = self.peek()
            if nxt is not None and nxt.kind == ".":
                self.i += 1
                name = self.take("IDENT", "a property name").text
                return Prop(tok.text, name)
            if nxt is not None and nxt.kind == "(":
                raise UnsupportedFeature(tok.text, "function calls other than toLower/COUNT")
            raise CypherSyntaxError(tok.pos, "a property access (variable.Property)")
        self.check_unsupported_keyword()
        raise self.error("a value expression")

    # --- RETURN items ---

    def parse_return_item(self) -> ReturnItem:
        tok = self.peek()
        if tok is None:
            raise self.error("a RETURN item")
        if tok.kind == "KEYWORD" and tok.text == "COUNT":
            self.i += 1
            self.take("(", "'(' after COUNT")
            var = self.take("IDENT", "a variable inside COUNT").text
            self.take(")", "')' closing COUNT")
            expr: Prop | Count | AggCompare = Count(var)
            nxt = self.peek()
            if nxt is not None and nxt.kind == ">":
                self.i += 1
                num = self.take("NUMBER", "a number after >")
                expr = AggCompare(expr, float(num.text))
        elif tok.kind == "IDENT":
            self.i += 1
            nxt = self.peek()
            if nxt is None or nxt.kind != ".":
                raise UnsupportedFeature(
                    tok.text, "returning whole variables; return a property instead"
                )
            self.i += 1
            name = self.take("IDENT", "a property name").text
            expr = Prop(tok.text, name)
        else:
            self.check_unsupported_keyword()
            raise self.error("a RETURN item (variable.Property or COUNT(variable))")
        alias = None
        if self.at_keyword("AS"):
            self.i += 1
            alias_tok = self.peek()
            if alias_tok is None or alias_tok.kind not in ("IDENT", "KEYWORD"):
                raise self.error("an alias after AS")
            self.i += 1
            alias = alias_tok.text
        return ReturnItem(expr, alias)

    # --- binding check ---

    def _check_bound(self, query: Query) -> None:
        bound = {np.var for np in query.node_patterns if np.var}
        bound |= {rp.var for rp in query.rel_patterns if rp.var}

        def walk(node) -> None:
            if isinstance(node, Prop):
                if node.var not in bound:
                    raise UnboundVariable(node.var)
            elif isinstance(node, ToLower):
                walk(node.expr)
            elif isinstance(node, Cmp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, (And, Or)):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Not):
                walk(node.operand)
            elif isinstance(node, Count):
                if node.var not in bound:
                    raise UnboundVariable(node.var)
            elif isinstance(node, AggCompare):
                walk(node.count)

        if query.where is not None:
            walk(query.where)
        for item in query.returns:
            walk(item.expr)


def parse_query(text: str) -> Query:
    """Parse query text into a :class:`Query` AST.

    Raises:
        CypherSyntaxError: malformed input.
        UnsupportedFeature: valid Cypher outside the subset.
        UnboundVariable: WHERE/RETURN references a variable not in MATCH.
    """
    return _Parser(text).parse()
