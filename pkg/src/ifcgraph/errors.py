"""Exception hierarchy shared across the ifcgraph package."""


class IfcGraphError(Exception):
    """Base class for all domain errors raised by ifcgraph."""


# --- STEP parsing ---

class StepError(IfcGraphError):
    """Base class for STEP file errors."""


class StepSyntaxError(StepError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


class UnterminatedString(StepSyntaxError):
    def __init__(self, line: int, col: int = 0):
        super().__init__("unterminated string literal", line, col)


class InvalidCharacter(StepSyntaxError):
    def __init__(self, char: str, line: int, col: int):
        super().__init__(f"invalid character {char!r}", line, col)
        self.char = char


class DuplicateEntityId(StepError):
    def __init__(self, entity_id: int, first_line: int, second_line: int):
        super().__init__(
            f"entity #{entity_id} defined twice (lines {first_line} and {second_line})"
        )
        self.entity_id = entity_id
        self.first_line = first_line
        self.second_line = second_line


class MissingSection(StepError):
    def __init__(self, name: str):
        super().__init__(f"missing section: {name}")
        self.name = name


# --- schema tables ---

class UnknownSchema(IfcGraphError):
    def __init__(self, schema_id: str):
        super().__init__(f"no bundled schema table for {schema_id!r}")
        self.schema_id = schema_id


class MalformedTable(IfcGraphError):
    def __init__(self, line: int, message: str):
        super().__init__(f"schema table line {line}: {message}")
        self.line = line


# --- graph ---

class DuplicateEntity(IfcGraphError):
    def __init__(self, entity_id: int):
        super().__init__(f"entity id {entity_id} already in graph")
        self.entity_id = entity_id


class UnknownNode(IfcGraphError):
    def __init__(self, node_key: int):
        super().__init__(f"no node with key {node_key}")
        self.node_key = node_key


class UnresolvedReference(IfcGraphError):
    def __init__(self, from_entity: int, attribute: str, missing: int):
        super().__init__(
            f"entity #{from_entity} attribute {attribute} references missing #{missing}"
        )
        self.from_entity = from_entity
        self.attribute = attribute
        self.missing = missing


# --- cypher ---

class CypherError(IfcGraphError):
    """Base class for query parsing/evaluation errors."""


class CypherSyntaxError(CypherError):
    def __init__(self, position: int, expected: str):
        super().__init__(f"at position {position}: expected {expected}")
        self.position = position
        self.expected = expected


class UnboundVariable(CypherError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} is not bound in the MATCH pattern")
        self.name = name


class UnsupportedFeature(CypherError):
    """Valid Cypher that falls outside the supported subset."""

    def __init__(self, token: str, hint: str = ""):
        msg = f"unsupported Cypher feature: {token}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)
        self.token = token


class QueryBudgetExceeded(CypherError):
    def __init__(self, budget: int):
        super().__init__(f"query exceeded step budget of {budget}")
        self.budget = budget


# --- orchestration / backends ---

class BackendError(IfcGraphError):
    """Base class for LLM backend failures."""


class BackendTimeout(BackendError):
    pass


class BackendHttpError(BackendError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"backend returned HTTP {status}")
        self.status = status
        self.body = body


class GenerationFailed(IfcGraphError):
    def __init__(self, last_error: str, attempts: list):
        super().__init__(f"could not generate a parseable query: {last_error}")
        self.last_error = last_error
        self.attempts = attempts


# --- benchmark ---

class MalformedRecord(IfcGraphError):
    def __init__(self, line: int, message: str):
        super().__init__(f"QA record at line {line}: {message}")
        self.line = line


class DuplicateId(IfcGraphError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate QA record id {record_id!r}")
        self.record_id = record_id
