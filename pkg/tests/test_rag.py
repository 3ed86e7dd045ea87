"""Question-answering orchestration: prompt assembly, scripted backend,
generation retry, the no-answer floor, and full ask() traces."""

import pytest

from ifcgraph import rag
from ifcgraph.cypher.engine import ResultTable
from ifcgraph.errors import BackendError, CypherSyntaxError, GenerationFailed
from ifcgraph.graph import GraphBuilder
from ifcgraph.rag import (
    NO_ANSWER,
    FewShotExample,
    MockBackend,
    PromptBundle,
    answer_from_context,
    ask,
    build_answer_prompt,
    build_cypher_prompt,
    extract_cypher,
    generate_cypher,
    load_fewshots,
    load_mock_script,
    make_bundle,
    normalize_question,
    schema_summary,
)


def tiny_graph():
    b = GraphBuilder()
    d1 = b.add_node(1, "IfcDoor", {"Name": "Haustuer"})
    d2 = b.add_node(2, "IfcDoor", {"Name": "D2"})
    w = b.add_node(3, "IfcWall", {"Name": "W", "Tag": "t"})
    b.add_edge(d1, w, "HasOpenings")
    b.add_edge(d2, w, "HasOpenings")
    return b.freeze()


def bundle_for(graph=None, fewshots=()):
    graph = graph if graph is not None else tiny_graph()
    return make_bundle(graph, list(fewshots))


# ---------------------------------------------------------------------------
# Question normalization and schema summary
# ---------------------------------------------------------------------------


def test_normalize_question():
    assert normalize_question("  How many   DOORS exist? ") == "how many doors exist"
    assert normalize_question("Same!") == normalize_question("same")


def test_schema_summary_lists_labels_attrs_and_triples():
    text = schema_summary(tiny_graph())
    lines = text.splitlines()
    assert lines[0] == "Graph schema"
    assert "  IfcDoor: Name" in lines
    assert "  IfcWall: Name, Tag" in lines
    assert "  (IfcDoor)-[HasOpenings]-(IfcWall)" in lines
    assert lines.index("Nodes:") < lines.index("Relationships:")


def test_schema_summary_empty_graph():
    assert schema_summary(GraphBuilder().freeze()) == "Graph schema"


def test_schema_summary_truncates_wide_attribute_lists():
    b = GraphBuilder()
    b.add_node(1, "Wide", {f"Attr{i:02d}": i for i in range(40)})
    text = schema_summary(b.freeze())
    (line,) = [ln for ln in text.splitlines() if ln.strip().startswith("Wide:")]
    assert "(+10 more)" in line
    assert line.count(",") == rag.MAX_LISTED_ATTRS


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------


def test_cypher_prompt_layout_and_fewshot_turns():
    shots = [FewShotExample("q1?", "MATCH (n:IfcDoor) RETURN COUNT(n)", "", "")]
    bundle = bundle_for(fewshots=shots)
    messages = build_cypher_prompt(bundle, "How many doors?")
    roles = [role for role, _ in messages]
    assert roles == ["system", "user", "assistant", "user"]
    system = messages[0][1]
    for rule in bundle.system_rules + bundle.clarification_rules:
        assert rule in system
    assert bundle.schema_summary in system
    assert messages[1][1] == "q1?"
    assert messages[2][1] == "MATCH (n:IfcDoor) RETURN COUNT(n)"
    assert messages[3][1] == "How many doors?"


def test_cypher_prompt_retry_carries_fix_banner():
    messages = build_cypher_prompt(bundle_for(), "Q?", prior_error="boom at position 3")
    final = messages[-1][1]
    assert final.startswith("Q?")
    assert "FIX: the previous query failed: boom at position 3" in final
    assert "corrected query" in final


def test_answer_prompt_shape():
    messages = build_answer_prompt("Q?", "MATCH (n) RETURN n.Name", "{'n.Name': \"x\"}")
    assert messages[0][0] == "system"
    assert messages[1][1] == (
        "Question: Q?\nCypher: MATCH (n) RETURN n.Name\nContext: {'n.Name': \"x\"}\nAnswer:"
    )


def test_load_fewshots_validates_cypher():
    shots = load_fewshots()
    assert len(shots) >= 3
    bad = '[{"question": "q", "cypher": "MATCH oops", "context": "", "response": ""}]'
    path = None
    import tempfile, os
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        fh.write(bad)
        path = fh.name
    try:
        with pytest.raises(CypherSyntaxError):
            load_fewshots(path)
    finally:
        os.unlink(path)


# ---------------------------------------------------------------------------
# Output extraction
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("MATCH (n) RETURN n.Name", "MATCH (n) RETURN n.Name"),
        ("```cypher\nMATCH (n) RETURN n.Name\n```", "MATCH (n) RETURN n.Name"),
        ("```\nMATCH (n) RETURN n.Name;\n```", "MATCH (n) RETURN n.Name"),
        ("Here is the query:\nMATCH (n) RETURN n.Name", "MATCH (n) RETURN n.Name"),
        ("  MATCH (n) RETURN n.Name;  ", "MATCH (n) RETURN n.Name"),
    ],
)
def test_extract_cypher(raw, expected):
    assert extract_cypher(raw) == expected


# ---------------------------------------------------------------------------
# Mock backend
# ---------------------------------------------------------------------------


def test_mock_backend_two_phases():
    backend = MockBackend({
        "How many doors exist?": {
            "cypher": "MATCH (n:IfcDoor) RETURN COUNT(n) AS C",
            "answer": "There are 2 doors.",
        }
    })
    gen = backend.complete(build_cypher_prompt(bundle_for(), "how many DOORS exist"))
    assert gen == "MATCH (n:IfcDoor) RETURN COUNT(n) AS C"
    ans = backend.complete(
        build_answer_prompt("How many doors exist?", gen, "{'C': 2}")
    )
    assert ans == "There are 2 doors."


def test_mock_backend_unmatched_questions():
    backend = MockBackend({}, default="MATCH (n) RETURN n.Name")
    assert backend.complete([("user", "anything")]) == "MATCH (n) RETURN n.Name"
    assert MockBackend({}).complete([("user", "anything")]) == ""
    assert (
        MockBackend({}).complete(build_answer_prompt("q", "c", "{'a': 1}")) == NO_ANSWER
    )


def test_bundled_mock_script_loads():
    backend = load_mock_script()
    assert normalize_question("How many doors exist in the building?") in backend.script


# ---------------------------------------------------------------------------
# Generation with retry
# ---------------------------------------------------------------------------


class SequenceBackend:
    """Replays canned completions; records the prompts it saw."""

    def __init__(self, outputs):
        self.outputs = list(outputs)
        self.calls = []

    def complete(self, messages, temperature=0.0, timeout=None):
        self.calls.append(messages)
        if not self.outputs:
            raise BackendError("script exhausted")
        return self.outputs.pop(0)


def test_generate_cypher_first_try():
    backend = SequenceBackend(["MATCH (n:IfcDoor) RETURN COUNT(n) AS C"])
    log = []
    query, text = generate_cypher(backend, bundle_for(), "q", attempts_log=log)
    assert text == "MATCH (n:IfcDoor) RETURN COUNT(n) AS C"
    assert query.is_aggregate
    assert log == [{"generated_cypher": text}]


def test_generate_cypher_retries_with_error_then_succeeds():
    backend = SequenceBackend(["MATCH oops", "MATCH (n) RETURN n.Name"])
    log = []
    _, text = generate_cypher(backend, bundle_for(), "q", attempts_log=log)
    assert text == "MATCH (n) RETURN n.Name"
    assert len(backend.calls) == 2
    assert "FIX" in backend.calls[1][-1][1]
    assert len(log) == 2
    assert "parse_or_exec_error" in log[0]


def test_generate_cypher_exhausts_attempts():
    backend = SequenceBackend(["MATCH oops", "still wrong"])
    with pytest.raises(GenerationFailed) as exc_info:
        generate_cypher(backend, bundle_for(), "q")
    assert len(backend.calls) == 2
    assert exc_info.value.attempts


# ---------------------------------------------------------------------------
# Answer floor
# ---------------------------------------------------------------------------


def test_answer_floor_skips_backend():
    class Exploding:
        def complete(self, *a, **k):
            raise AssertionError("backend must not be called")

    assert answer_from_context(Exploding(), "q", "c", "[]") == NO_ANSWER
    table = ResultTable(["X"], [{"X": None}])
    assert answer_from_context(Exploding(), "q", "c", "{'X': null}", table) == NO_ANSWER


def test_answer_uses_first_line_of_backend_output():
    backend = SequenceBackend(["The answer.\nExtra notes."])
    out = answer_from_context(backend, "q", "c", "{'X': 1}", ResultTable(["X"], [{"X": 1}]))
    assert out == "The answer."


# ---------------------------------------------------------------------------
# ask(): full loop
# ---------------------------------------------------------------------------


def test_ask_answered_outcome_and_trace():
    backend = MockBackend({
        "How many doors?": {
            "cypher": "MATCH (n:IfcDoor) RETURN COUNT(n) AS C",
            "answer": "There are 2 doors.",
        }
    })
    trace = ask(backend, bundle_for(), tiny_graph(), "How many doors?")
    assert trace.outcome == "answered"
    assert trace.final_answer == "There are 2 doors."
    assert trace.context == "{'C': 2}"
    assert trace.cypher == "MATCH (n:IfcDoor) RETURN COUNT(n) AS C"
    d = trace.to_dict()
    assert set(d) == {
        "question", "cypher", "context", "answer", "outcome", "error",
        "timings", "attempts",
    }
    assert set(d["timings"]) == {"generate_s", "execute_s", "answer_s"}


def test_ask_no_answer_on_empty_context():
    backend = MockBackend({
        "Any lifts?": {"cypher": "MATCH (n:IfcLift) RETURN COUNT(n) > 0 AS P",
                        "answer": "unused"},
        "Any name?": {"cypher": "MATCH (n:IfcWall) RETURN n.LongName AS L",
                       "answer": "unused"},
    })
    trace = ask(backend, bundle_for(), tiny_graph(), "Any name?")
    assert trace.outcome == "no_answer"
    assert trace.final_answer == NO_ANSWER
    assert trace.context == "{'L': null}"


def test_ask_failed_generation():
    trace = ask(MockBackend({}), bundle_for(), tiny_graph(), "mystery question")
    assert trace.outcome == "failed"
    assert trace.cypher == ""
    assert trace.error
    assert trace.final_answer == ""


def test_ask_failed_backend_error_is_captured():
    trace = ask(SequenceBackend([]), bundle_for(), tiny_graph(), "q")
    assert trace.outcome == "failed"
    assert "script exhausted" in trace.error
    assert trace.error_kind == "BackendError"


def test_ask_is_deterministic():
    def once():
        backend = load_mock_script()
        bundle = bundle_for()
        t = ask(backend, bundle, tiny_graph(), "How many doors exist in the building?")
        return (t.cypher, t.context, t.final_answer, t.outcome)

    assert once() == once()
