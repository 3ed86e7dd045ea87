"""Tokenizer and parser for ISO 10303-21 (STEP physical file) IFC documents.

Parses the HEADER and DATA sections into :class:`SourceFile` /
:class:`EntityInstance` structures with typed parameter values. Geometry is
not interpreted; every entity record is kept verbatim at the parameter level
so the graph builder can decide what matters.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import (
    DuplicateEntityId,
    InvalidCharacter,
    MissingSection,
    StepSyntaxError,
    UnterminatedString,
)

# ---------------------------------------------------------------------------
# Parameter values
# ---------------------------------------------------------------------------


class ParamValue:
    """Base class for parsed STEP parameter values."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Unset(ParamValue):
    """The ``$`` marker: attribute not provided."""


@dataclass(frozen=True, slots=True)
class Derived(ParamValue):
    """The ``*`` marker: attribute redeclared as derived."""


UNSET = Unset()
DERIVED = Derived()


@dataclass(frozen=True, slots=True)
class Integer(ParamValue):
    value: int


@dataclass(frozen=True, slots=True)
class Real(ParamValue):
    value: float
    # Original lexeme ("1000.") kept for faithful re-rendering; not part of
    # equality so round-tripped files compare equal at the value level.
    text: str = field(default="", compare=False)

    def lexeme(self) -> str:
        return self.text or format_real(self.value)


@dataclass(frozen=True, slots=True)
class Text(ParamValue):
    value: str


@dataclass(frozen=True, slots=True)
class Enum(ParamValue):
    symbol: str


@dataclass(frozen=True, slots=True)
class Boolean(ParamValue):
    value: bool


@dataclass(frozen=True, slots=True)
class EntityRef(ParamValue):
    target: int


@dataclass(frozen=True, slots=True)
class Aggregate(ParamValue):
    items: tuple[ParamValue, ...]


@dataclass(frozen=True, slots=True)
class Typed(ParamValue):
    type_name: str
    inner: ParamValue


# ---------------------------------------------------------------------------
# File structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EntityInstance:
    id: int
    type_name: str
    params: tuple[ParamValue, ...]
    source_line: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class HeaderInfo:
    file_description: tuple[str, ...] = ()
    file_name: str = ""
    schema_ids: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class SourceFile:
    header: HeaderInfo
    entities: tuple[EntityInstance, ...]
    source_name: str = "<string>"

    def entity(self, entity_id: int) -> EntityInstance | None:
        i = bisect_right(self._ids(), entity_id) - 1
        if i >= 0 and self.entities[i].id == entity_id:
            return self.entities[i]
        return None

    def _ids(self) -> list[int]:
        return [e.id for e in self.entities]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

# Token kinds
T_ID = "HASH_ID"
T_IDENT = "IDENT"
T_STRING = "STRING"
T_REAL = "REAL"
T_INTEGER = "INTEGER"
T_ENUM = "ENUM"
T_KEYWORD = "KEYWORD"
T_PUNCT = "PUNCT"

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>/\*.*?\*/)
    | (?P<ID>\#\d+)
    | (?P<KEYWORD>END-ISO-10303-21|ISO-10303-21)
    | (?P<NUMBER>[+-]?\d+(?:\.\d*)?(?:[Ee][+-]?\d+)?)
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<STRING>'(?:[^']|'')*')
    | (?P<ENUM>\.[A-Za-z_][A-Za-z0-9_]*\.)
    | (?P<PUNCT>[();,=*$])
    """,
    re.VERBOSE | re.DOTALL,
)


class _LineIndex:
    """Maps character offsets to 1-based (line, col) without rescanning."""

    def __init__(self, text: str):
        self._starts = [0]
        pos = -1
        while True:
            pos = text.find("\n", pos + 1)
            if pos < 0:
                break
            self._starts.append(pos + 1)

    def linecol(self, pos: int) -> tuple[int, int]:
        line = bisect_right(self._starts, pos)
        return line, pos - self._starts[line - 1] + 1


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Tokenize STEP source text into ``(kind, value, offset)`` triples.

    Whitespace and ``/* */`` comments are skipped. String values are decoded
    (apostrophe doubling, ``\\X\\``/``\\X2\\`` escapes).

    Raises:
        UnterminatedString: on a string literal with no closing quote.
        InvalidCharacter: on any character outside the STEP token alphabet.
        StepSyntaxError: on binary literals (out of scope for IFC models).
    """
    tokens: list[tuple[str, str, int]] = []
    append = tokens.append
    pos = 0
    n = len(text)
    lines: _LineIndex | None = None

    def at(p: int) -> tuple[int, int]:
        nonlocal lines
        if lines is None:
            lines = _LineIndex(text)
        return lines.linecol(p)

    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            line, col = at(pos)
            if ch == "'":
                raise UnterminatedString(line, col)
            if ch == '"':
                raise StepSyntaxError("binary values are not supported", line, col)
            if text.startswith("/*", pos):
                raise StepSyntaxError("unterminated comment", line, col)
            if ch == "!":
                raise StepSyntaxError(
                    "user-defined entity keywords are not supported", line, col
                )
            raise InvalidCharacter(ch, line, col)
        kind = m.lastgroup
        value = m.group()
        pos = m.end()
        if kind == "WS" or kind == "COMMENT":
            continue
        if kind == "NUMBER":
            if "." in value or "e" in value or "E" in value:
                append((T_REAL, value, m.start()))
            else:
                append((T_INTEGER, value, m.start()))
        elif kind == "ID":
            append((T_ID, value, m.start()))
        elif kind == "IDENT":
            append((T_IDENT, value, m.start()))
        elif kind == "STRING":
            append((T_STRING, value, m.start()))
        elif kind == "ENUM":
            append((T_ENUM, value, m.start()))
        elif kind == "KEYWORD":
            append((T_KEYWORD, value, m.start()))
        else:
            append((T_PUNCT, value, m.start()))
    return tokens


# ---------------------------------------------------------------------------
# String escape handling
# ---------------------------------------------------------------------------

_X2_RE = re.compile(r"\\X2\\((?:[0-9A-Fa-f]{4})+)\\X0\\")
_X4_RE = re.compile(r"\\X4\\((?:[0-9A-Fa-f]{8})+)\\X0\\")
_X1_RE = re.compile(r"\\X\\([0-9A-Fa-f]{2})")
_S_RE = re.compile(r"\\S\\(.)", re.DOTALL)
_PAGE_RE = re.compile(r"\\P[A-I]\\")


def decode_step_string(raw: str) -> str:
    """Decode the inner text of a STEP string literal to Unicode.

    Handles ``''`` apostrophe doubling, ``\\\\``, ``\\X\\hh``, ``\\X2\\…\\X0\\``
    and ``\\X4\\…\\X0\\`` sequences, and ``\\S\\c`` upper-page shorthand.
    Malformed escapes are left verbatim (lenient; real exports contain stray
    backslashes).
    """
    s = raw.replace("''", "'")
    if "\\" not in s:
        return s
    out: list[str] = []
    i = 0
    n = len(s)
    while i < n:
        ch = s[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if s.startswith("\\\\", i):
            out.append("\\")
            i += 2
            continue
        m = _X2_RE.match(s, i)
        if m:
            hexes = m.group(1)
            out.extend(chr(int(hexes[j : j + 4], 16)) for j in range(0, len(hexes), 4))
            i = m.end()
            continue
        m = _X4_RE.match(s, i)
        if m:
            hexes = m.group(1)
            out.extend(chr(int(hexes[j : j + 8], 16)) for j in range(0, len(hexes), 8))
            i = m.end()
            continue
        m = _X1_RE.match(s, i)
        if m:
            out.append(chr(int(m.group(1), 16)))
            i = m.end()
            continue
        m = _S_RE.match(s, i)
        if m:
            out.append(chr((ord(m.group(1)) + 128) & 0xFF))
            i = m.end()
            continue
        m = _PAGE_RE.match(s, i)
        if m:
            i = m.end()
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def encode_step_string(value: str) -> str:
    """Encode a Unicode string as the inner text of a STEP string literal."""
    out: list[str] = []
    for ch in value:
        cp = ord(ch)
        if ch == "'":
            out.append("''")
        elif ch == "\\":
            out.append("\\\\")
        elif cp < 0x20:
            out.append(f"\\X\\{cp:02X}")
        elif cp <= 0xFF:
            out.append(ch)
        elif cp <= 0xFFFF:
            out.append(f"\\X2\\{cp:04X}\\X0\\")
        else:
            out.append(f"\\X4\\{cp:08X}\\X0\\")
    return "".join(out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TYPE_NAME_RE = re.compile(r"[A-Z][A-Z0-9_]*")


class _Parser:
    def __init__(self, text: str, tokens: list[tuple[str, str, int]]):
        self.text = text
        self.tokens = tokens
        self.pos = 0
        self._lines: _LineIndex | None = None

    def linecol(self, offset: int) -> tuple[int, int]:
        if self._lines is None:
            self._lines = _LineIndex(self.text)
        return self._lines.linecol(offset)

    def error(self, expected: str) -> StepSyntaxError:
        if self.pos < len(self.tokens):
            offset = self.tokens[self.pos][2]
            got = self.tokens[self.pos][1]
        else:
            offset = len(self.text)
            got = "end of input"
        line, col = self.linecol(offset)
        return StepSyntaxError(f"expected {expected}, got {got!r}", line, col)

    def peek(self) -> tuple[str, str, int] | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise self.error("more input")
        self.pos += 1
        return tok

    def expect_punct(self, ch: str) -> None:
        tok = self.peek()
        if tok is None or tok[0] != T_PUNCT or tok[1] != ch:
            raise self.error(f"'{ch}'")
        self.pos += 1

    def expect_ident(self, name: str | None = None) -> str:
        tok = self.peek()
        if tok is None or tok[0] != T_IDENT:
            raise self.error(name or "identifier")
        if name is not None and tok[1].upper() != name:
            raise self.error(name)
        self.pos += 1
        return tok[1]

    # -- parameters --

    def parse_param(self) -> ParamValue:
        tok = self.peek()
        if tok is None:
            raise self.error("parameter")
        kind, value, offset = tok
        if kind == T_PUNCT:
            if value == "$":
                self.pos += 1
                return UNSET
            if value == "*":
                self.pos += 1
                return DERIVED
            if value == "(":
                self.pos += 1
                items = self.parse_param_list(")")
                return Aggregate(tuple(items))
            raise self.error("parameter")
        self.pos += 1
        if kind == T_ID:
            target = int(value[1:])
            if target < 1:
                line, col = self.linecol(offset)
                raise StepSyntaxError("entity reference must be >= #1", line, col)
            return EntityRef(target)
        if kind == T_STRING:
            return Text(decode_step_string(value[1:-1]))
        if kind == T_INTEGER:
            return Integer(int(value))
        if kind == T_REAL:
            return Real(float(value), value)
        if kind == T_ENUM:
            sym = value[1:-1]
            if sym == "T":
                return Boolean(True)
            if sym == "F":
                return Boolean(False)
            return Enum(sym)
        if kind == T_IDENT:
            # Typed value: NAME(inner)
            self.expect_punct("(")
            inner = self.parse_param()
            if isinstance(inner, Typed):
                line, col = self.linecol(offset)
                raise StepSyntaxError("nested typed values are not allowed", line, col)
            self.expect_punct(")")
            return Typed(value.upper(), inner)
        raise self.error("parameter")

    def parse_param_list(self, closer: str) -> list[ParamValue]:
        params: list[ParamValue] = []
        tok = self.peek()
        if tok is not None and tok[0] == T_PUNCT and tok[1] == closer:
            self.pos += 1
            return params
        while True:
            params.append(self.parse_param())
            tok = self.peek()
            if tok is None:
                raise self.error(f"',' or '{closer}'")
            if tok[0] == T_PUNCT and tok[1] == ",":
                self.pos += 1
                continue
            if tok[0] == T_PUNCT and tok[1] == closer:
                self.pos += 1
                return params
            raise self.error(f"',' or '{closer}'")

    # -- records --

    def parse_simple_record(self) -> tuple[str, list[ParamValue]]:
        name = self.expect_ident()
        self.expect_punct("(")
        params = self.parse_param_list(")")
        self.expect_punct(";")
        return name.upper(), params

    def parse_entity_record(self) -> EntityInstance:
        tok = self.take()
        if tok[0] != T_ID:
            raise self.error("entity record '#N='")
        entity_id = int(tok[1][1:])
        line, _ = self.linecol(tok[2])
        if entity_id < 1:
            raise StepSyntaxError("entity id must be >= 1", line, 1)
        self.expect_punct("=")
        name_tok = self.peek()
        if name_tok is None or name_tok[0] != T_IDENT:
            raise self.error("entity type name")
        type_name = name_tok[1].upper()
        if not _TYPE_NAME_RE.fullmatch(type_name):
            raise self.error("entity type name")
        self.pos += 1
        self.expect_punct("(")
        params = self.parse_param_list(")")
        self.expect_punct(";")
        return EntityInstance(entity_id, type_name, tuple(params), line)


def parse_file(text: str, source_name: str = "<string>") -> SourceFile:
    """Parse a complete STEP physical file into a :class:`SourceFile`.

    Raises:
        StepSyntaxError, DuplicateEntityId, MissingSection
    """
    tokens = tokenize(text)
    p = _Parser(text, tokens)

    tok = p.peek()
    if tok is None or tok[0] != T_KEYWORD or tok[1] != "ISO-10303-21":
        raise MissingSection("ISO-10303-21")
    p.pos += 1
    p.expect_punct(";")

    # HEADER
    tok = p.peek()
    if tok is None or tok[0] != T_IDENT or tok[1].upper() != "HEADER":
        raise MissingSection("HEADER")
    p.pos += 1
    p.expect_punct(";")

    file_description: tuple[str, ...] = ()
    file_name = ""
    schema_ids: tuple[str, ...] = ()
    while True:
        tok = p.peek()
        if tok is None:
            raise MissingSection("ENDSEC")
        if tok[0] == T_IDENT and tok[1].upper() == "ENDSEC":
            p.pos += 1
            p.expect_punct(";")
            break
        name, params = p.parse_simple_record()
        if name == "FILE_DESCRIPTION" and params:
            file_description = _text_list(params[0])
        elif name == "FILE_NAME" and params:
            if isinstance(params[0], Text):
                file_name = params[0].value
        elif name == "FILE_SCHEMA" and params:
            schema_ids = _text_list(params[0])

    # DATA
    tok = p.peek()
    if tok is None or tok[0] != T_IDENT or tok[1].upper() != "DATA":
        raise MissingSection("DATA")
    p.pos += 1
    p.expect_punct(";")

    entities: list[EntityInstance] = []
    seen: dict[int, int] = {}
    while True:
        tok = p.peek()
        if tok is None:
            raise MissingSection("ENDSEC")
        if tok[0] == T_IDENT and tok[1].upper() == "ENDSEC":
            p.pos += 1
            p.expect_punct(";")
            break
        ent = p.parse_entity_record()
        if ent.id in seen:
            raise DuplicateEntityId(ent.id, seen[ent.id], ent.source_line)
        seen[ent.id] = ent.source_line
        entities.append(ent)

    tok = p.peek()
    if tok is None or tok[0] != T_KEYWORD or tok[1] != "END-ISO-10303-21":
        raise MissingSection("END-ISO-10303-21")
    p.pos += 1
    p.expect_punct(";")
    if p.peek() is not None:
        raise p.error("end of file")

    entities.sort(key=lambda e: e.id)
    header = HeaderInfo(file_description, file_name, schema_ids)
    return SourceFile(header, tuple(entities), source_name)


def _text_list(param: ParamValue) -> tuple[str, ...]:
    if isinstance(param, Aggregate):
        return tuple(x.value for x in param.items if isinstance(x, Text))
    if isinstance(param, Text):
        return (param.value,)
    return ()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def format_real(value: float) -> str:
    """Shortest decimal representation that round-trips, with a '.' present."""
    s = repr(value)
    if "e" in s or "E" in s:
        mantissa, _, exp = s.partition("e")
        if "." not in mantissa:
            mantissa += "."
        return f"{mantissa}E{int(exp)}"
    if "." not in s and "inf" not in s and "nan" not in s:
        s += "."
    return s


def serialize_param(param: ParamValue) -> str:
    if isinstance(param, Unset):
        return "$"
    if isinstance(param, Derived):
        return "*"
    if isinstance(param, Integer):
        return str(param.value)
    if isinstance(param, Real):
        lex = param.lexeme()
        # The stored lexeme is authoritative only if it still parses to value.
        try:
            if float(lex) == param.value:
                return lex
        except ValueError:
            pass
        return format_real(param.value)
    if isinstance(param, Text):
        return f"'{encode_step_string(param.value)}'"
    if isinstance(param, Boolean):
        return ".T." if param.value else ".F."
    if isinstance(param, Enum):
        return f".{param.symbol}."
    if isinstance(param, EntityRef):
        return f"#{param.target}"
    if isinstance(param, Aggregate):
        return "(" + ",".join(serialize_param(x) for x in param.items) + ")"
    if isinstance(param, Typed):
        return f"{param.type_name}({serialize_param(param.inner)})"
    raise TypeError(f"unknown parameter value: {param!r}")


def serialize(sf: SourceFile) -> str:
    """Render a SourceFile back to STEP text (reparses to an equal file)."""
    h = sf.header
    desc = "(" + ",".join(f"'{encode_step_string(d)}'" for d in h.file_description) + ")"
    schemas = "(" + ",".join(f"'{encode_step_string(s)}'" for s in h.schema_ids) + ")"
    lines = [
        "ISO-10303-21;",
        "HEADER;",
        f"FILE_DESCRIPTION({desc},'2;1');",
        f"FILE_NAME('{encode_step_string(h.file_name)}','',(''),(''),'','','');",
        f"FILE_SCHEMA({schemas});",
        "ENDSEC;",
        "DATA;",
    ]
    for ent in sf.entities:
        params = ",".join(serialize_param(x) for x in ent.params)
        lines.append(f"#{ent.id}={ent.type_name}({params});")
    lines.append("ENDSEC;")
    lines.append("END-ISO-10303-21;")
    return "\n".join(lines) + "\n"


def read_ifc(path: str) -> SourceFile:
    """Read and parse an .ifc file (ISO-8859-1 with STEP escapes)."""
    with open(path, "r", encoding="iso-8859-1", newline="") as fh:
        text = fh.read()
    return parse_file(text, source_name=path)
