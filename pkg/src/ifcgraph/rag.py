"""Question answering over the graph: prompt construction, pluggable LLM
backends, query generation with bounded retry, and answer phrasing.

The pipeline is: build a prompt (rules + graph schema summary + few-shot
examples), let the backend emit a Cypher query, parse it under the subset
grammar (retrying once with the error appended), execute it, render the
result table as a context string, and have the backend phrase the answer.
An empty or all-null context short-circuits to the deterministic
"I don't know the answer." floor without calling the backend.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources

import requests

from .cypher import parse_query, execute, render_context
from .cypher.engine import ResultTable, context_is_empty
from .errors import (
    BackendError,
    BackendHttpError,
    BackendTimeout,
    CypherError,
    GenerationFailed,
    IfcGraphError,
)
from .graph import PropertyGraph

NO_ANSWER = "I don't know the answer."

DEFAULT_SYSTEM_RULES = [
    "You translate questions about a building model into Cypher queries.",
    "Use only the node labels, attribute names and relationship types listed in the graph schema below.",
    "All relationships are undirected: write patterns as (a)-[r:TYPE]-(b), never with arrows.",
    "Supported Cypher: a single linear MATCH path, WHERE with CONTAINS, =, >, toLower, AND, OR, NOT, and RETURN of properties, COUNT, or COUNT(..) > 0, optionally with AS aliases and LIMIT.",
    "Do not use meaningful variable names: number them sequentially as n1, n2, ... for nodes and r1, r2, ... for relationships.",
    "Output only the Cypher query, without explanations or code fences.",
]

DEFAULT_CLARIFICATION_RULES = [
    'Questions about the roof space refer to Roof as an IfcSpace (a spatial unit like a room); the structural element is the separate IfcRoof node.',
    "Match names case-insensitively by applying toLower to both sides of CONTAINS.",
]


@dataclass(frozen=True)
class FewShotExample:
    question: str
    cypher: str
    context: str
    response: str


@dataclass(frozen=True)
class PromptBundle:
    system_rules: list[str]
    schema_summary: str
    fewshots: list[FewShotExample]
    clarification_rules: list[str]


def normalize_question(question: str) -> str:
    return re.sub(r"\s+", " ", question).strip().strip("?.!").lower()


# ---------------------------------------------------------------------------
# Schema summary
# ---------------------------------------------------------------------------

MAX_LISTED_ATTRS = 30


def schema_summary(graph: PropertyGraph) -> str:
    """Line-oriented summary of the loaded graph for the prompt.

    Lists every node label with its observed attribute names and every
    distinct (label, relationship, label) triple, unordered endpoints.
    """
    lines = ["Graph schema"]
    if not graph.nodes:
        return "\n".join(lines)

    attrs_by_label: dict[str, set[str]] = {}
    for node in graph.nodes:
        attrs_by_label.setdefault(node.label, set()).update(node.attrs)
    lines.append("Nodes:")
    for label in sorted(attrs_by_label):
        names = sorted(attrs_by_label[label])
        if len(names) > MAX_LISTED_ATTRS:
            shown = ", ".join(names[:MAX_LISTED_ATTRS])
            lines.append(f"  {label}: {shown}, ... (+{len(names) - MAX_LISTED_ATTRS} more)")
        else:
            lines.append(f"  {label}: {', '.join(names)}" if names else f"  {label}:")

    triples: set[tuple[str, str, str]] = set()
    for edge in graph.edges:
        a = graph.nodes[edge.a].label
        b = graph.nodes[edge.b].label
        lo, hi = sorted((a, b))
        triples.add((lo, edge.label, hi))
    lines.append("Relationships:")
    for a, rel, b in sorted(triples):
        lines.append(f"  ({a})-[{rel}]-({b})")
    return "\n".join(lines)


def make_bundle(
    graph: PropertyGraph, fewshots: list[FewShotExample] | None = None
) -> PromptBundle:
    if fewshots is None:
        fewshots = load_fewshots()
    return PromptBundle(
        list(DEFAULT_SYSTEM_RULES),
        schema_summary(graph),
        list(fewshots),
        list(DEFAULT_CLARIFICATION_RULES),
    )


def load_fewshots(path: str | None = None) -> list[FewShotExample]:
    """Load few-shot records (JSON list); each cypher must parse."""
    if path is None:
        raw = (resources.files("ifcgraph") / "data" / "fewshots.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    out = []
    for rec in json.loads(raw):
        example = FewShotExample(
            rec["question"], rec["cypher"], rec.get("context", ""), rec.get("response", "")
        )
        parse_query(example.cypher)  # validate at load
        out.append(example)
    return out


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------

FIX_BANNER = "FIX"


def build_cypher_prompt(
    bundle: PromptBundle, question: str, prior_error: str | None = None
) -> list[tuple[str, str]]:
    """Chat messages for query generation.

    Few-shots appear as alternating user/assistant turns; the final user turn
    is the question, with the previous parse error under a FIX banner when
    retrying.
    """
    system = "\n".join(
        bundle.system_rules + [""] + [bundle.schema_summary] + [""] + bundle.clarification_rules
    )
    messages: list[tuple[str, str]] = [("system", system)]
    for shot in bundle.fewshots:
        messages.append(("user", shot.question))
        messages.append(("assistant", shot.cypher))
    final = question
    if prior_error:
        final += f"\n\n{FIX_BANNER}: the previous query failed: {prior_error}\nReturn a corrected query."
    messages.append(("user", final))
    return messages


def build_answer_prompt(
    question: str, cypher_text: str, context: str
) -> list[tuple[str, str]]:
    system = (
        "You convert graph query results into a short natural-language answer. "
        "Answer in one sentence using only the values in the context."
    )
    user = f"Question: {question}\nCypher: {cypher_text}\nContext: {context}\nAnswer:"
    return [("system", system), ("user", user)]


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class MockBackend:
    """Deterministic scripted backend for offline runs and tests.

    The script maps normalized questions to ``{"cypher": ..., "answer": ...}``.
    Unmatched questions get ``default`` for the query phase and the no-answer
    sentence for the answer phase.
    """

    def __init__(self, script: dict[str, dict], default: str | None = None):
        self.script = {normalize_question(q): rec for q, rec in script.items()}
        self.default = default

    def complete(
        self,
        messages: list[tuple[str, str]],
        temperature: float = 0.0,
        timeout: float | None = None,
    ) -> str:
        last_user = next(text for role, text in reversed(messages) if role == "user")
        m = re.match(r"Question: (.*?)\nCypher: ", last_user, re.DOTALL)
        if m is not None:  # answer phase
            rec = self.script.get(normalize_question(m.group(1)))
            if rec is not None and "answer" in rec:
                return rec["answer"]
            return NO_ANSWER
        question = last_user.split("\n", 1)[0]
        rec = self.script.get(normalize_question(question))
        if rec is not None and "cypher" in rec:
            return rec["cypher"]
        return self.default if self.default is not None else ""


def load_mock_script(path: str | None = None) -> MockBackend:
    """Mock backend from a JSON script file (bundled default when no path)."""
    if path is None:
        raw = (resources.files("ifcgraph") / "data" / "mock_script.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    return MockBackend(json.loads(raw))


class HttpChatBackend:
    """Chat-completions-style HTTP backend.

    Base URL / model come from arguments or the IFCGRAPH_LLM_URL and
    IFCGRAPH_LLM_MODEL environment variables; the API key from
    IFCGRAPH_LLM_KEY. Temperature 0 for reproducible queries.
    """

    KEY_ENV = "IFCGRAPH_LLM_KEY"

    def __init__(
        self,
        base_url: str | None = None,
        model: str | None = None,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.base_url = (base_url or os.environ.get("IFCGRAPH_LLM_URL", "")).rstrip("/")
        self.model = model or os.environ.get("IFCGRAPH_LLM_MODEL", "")
        if not self.base_url or not self.model:
            raise BackendError(
                "HTTP backend needs a base URL and model id "
                "(IFCGRAPH_LLM_URL / IFCGRAPH_LLM_MODEL)"
            )
        self.timeout = timeout
        self.session = session or requests.Session()

    def complete(
        self,
        messages: list[tuple[str, str]],
        temperature: float = 0.0,
        timeout: float | None = None,
    ) -> str:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [{"role": role, "content": text} for role, text in messages],
            "temperature": temperature,
        }
        try:
            resp = self.session.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=timeout or self.timeout,
            )
        except requests.Timeout as exc:
            raise BackendTimeout(str(exc)) from exc
        except requests.RequestException as exc:
            raise BackendError(str(exc)) from exc
        if resp.status_code != 200:
            raise BackendHttpError(resp.status_code, resp.text[:500])
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError(f"malformed backend response: {exc}") from exc


# ---------------------------------------------------------------------------
# Generation and answering
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:[A-Za-z]*\n)?(.*?)```", re.DOTALL)


def extract_cypher(raw: str) -> str:
    """Strip code fences and leading prose from backend output."""
    text = raw.strip()
    m = _FENCE_RE.search(text)
    if m is not None:
        text = m.group(1).strip()
    i = text.upper().find("MATCH")
    if i > 0:
        text = text[i:]
    return text.strip().rstrip(";").strip()


def generate_cypher(
    backend,
    bundle: PromptBundle,
    question: str,
    max_attempts: int = 2,
    attempts_log: list | None = None,
):
    """Generate and parse a query, retrying once with the error appended.

    Returns ``(query, cypher_text)``. Raises :class:`GenerationFailed` when
    every attempt fails to parse; backend errors propagate.
    """
    prior_error: str | None = None
    log = attempts_log if attempts_log is not None else []
    for _ in range(max_attempts):
        messages = build_cypher_prompt(bundle, question, prior_error)
        raw = backend.complete(messages, temperature=0.0)
        cypher_text = extract_cypher(raw)
        entry = {"generated_cypher": cypher_text}
        log.append(entry)
        try:
            query = parse_query(cypher_text)
        except CypherError as exc:
            prior_error = str(exc)
            entry["parse_or_exec_error"] = prior_error
            continue
        return query, cypher_text
    raise GenerationFailed(prior_error or "no output", log)


def answer_from_context(
    backend,
    question: str,
    cypher_text: str,
    context: str,
    table: ResultTable | None = None,
) -> str:
    """Phrase the answer; empty or all-null context short-circuits to the
    deterministic no-answer floor without calling the backend."""
    if context_is_empty(context, table):
        return NO_ANSWER
    raw = backend.complete(build_answer_prompt(question, cypher_text, context))
    return raw.strip().splitlines()[0] if raw.strip() else NO_ANSWER


# ---------------------------------------------------------------------------
# ask()
# ---------------------------------------------------------------------------


@dataclass
class AskTrace:
    question: str
    attempts: list[dict] = field(default_factory=list)
    cypher: str = ""
    context: str = ""
    final_answer: str = ""
    outcome: str = "failed"  # answered | no_answer | failed
    error: str = ""
    error_kind: str = ""  # exception class name, not part of the wire shape
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "cypher": self.cypher,
            "context": self.context,
            "answer": self.final_answer,
            "outcome": self.outcome,
            "error": self.error,
            "timings": self.timings,
            "attempts": self.attempts,
        }


def ask(
    backend,
    bundle: PromptBundle,
    graph: PropertyGraph,
    question: str,
    max_attempts: int = 2,
) -> AskTrace:
    """Run the full question-to-answer loop; no exception escapes."""
    trace = AskTrace(question=question)
    t0 = time.perf_counter()
    try:
        query, cypher_text = generate_cypher(
            backend, bundle, question, max_attempts, attempts_log=trace.attempts
        )
    except (GenerationFailed, BackendError) as exc:
        trace.error = str(exc)
        trace.error_kind = type(exc).__name__
        trace.timings["generate_s"] = time.perf_counter() - t0
        return trace
    trace.cypher = cypher_text
    trace.timings["generate_s"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    try:
        table = execute(query, graph)
    except IfcGraphError as exc:
        trace.error = str(exc)
        trace.error_kind = type(exc).__name__
        if trace.attempts:
            trace.attempts[-1]["parse_or_exec_error"] = str(exc)
        trace.timings["execute_s"] = time.perf_counter() - t1
        return trace
    trace.context = render_context(table)
    if trace.attempts:
        trace.attempts[-1]["context"] = trace.context
    trace.timings["execute_s"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    try:
        trace.final_answer = answer_from_context(
            backend, question, cypher_text, trace.context, table
        )
    except BackendError as exc:
        trace.error = str(exc)
        trace.error_kind = type(exc).__name__
        trace.timings["answer_s"] = time.perf_counter() - t2
        return trace
    trace.timings["answer_s"] = time.perf_counter() - t2
    trace.outcome = "no_answer" if trace.final_answer == NO_ANSWER else "answered"
    return trace
