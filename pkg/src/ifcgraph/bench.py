"""Benchmark harness: run a QA dataset through the pipeline and score it.

QA files are JSON Lines (see docs/qa-format.md); each record carries a
question, the expected answer, an optional gold Cypher query, and a match
mode. Accuracy is kept as an exact fraction until display.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .cypher import parse_query
from .errors import CypherError, DuplicateId, MalformedRecord
from .graph import PropertyGraph
from .rag import NO_ANSWER, PromptBundle, ask

MATCH_MODES = ("normalized", "numeric", "contains")

# Function words ignored when checking expected content tokens.
_STOPWORDS = {
    "the", "a", "an", "is", "are", "there", "in", "of", "this", "that",
    "it", "its", "to", "and", "for", "with", "as", "at", "on", "by",
    "has", "have", "was", "were",
}

_NUMBER_RE = re.compile(r"-?\d[\d,]*(?:\.\d+)?")


@dataclass(frozen=True)
class QaRecord:
    id: str
    question: str
    expected_answer: str
    gold_cypher: str | None = None
    match_mode: str = "normalized"
    source: str = ""


@dataclass
class Verdict:
    id: str
    outcome: str
    generated_cypher: str
    context: str
    answer: str
    passed: bool
    reason: str


@dataclass
class QaReport:
    verdicts: list[Verdict] = field(default_factory=list)
    accuracy: Fraction | None = None
    failure_counts: dict[str, int] = field(default_factory=dict)

    @property
    def accuracy_percent(self) -> str:
        """Accuracy for display, one decimal place (e.g. '68.3%')."""
        if self.accuracy is None:
            return "n/a"
        return f"{float(self.accuracy) * 100:.1f}%"

    def to_dict(self) -> dict:
        return {
            "accuracy": None if self.accuracy is None else float(self.accuracy),
            "accuracy_percent": self.accuracy_percent,
            "failure_counts": self.failure_counts,
            "verdicts": [vars(v) for v in self.verdicts],
        }

    def to_table(self) -> str:
        header = f"{'id':<12} {'pass':<5} {'outcome':<10} {'reason':<18} answer"
        rows = [header, "-" * len(header)]
        for v in self.verdicts:
            rows.append(
                f"{v.id:<12} {'yes' if v.passed else 'no':<5} "
                f"{v.outcome:<10} {v.reason or '-':<18} {v.answer[:60]}"
            )
        rows.append(f"accuracy: {self.accuracy_percent}")
        return "\n".join(rows)


def load_qa(path: str) -> list[QaRecord]:
    """Load and validate a JSON Lines QA file.

    Raises:
        MalformedRecord: bad JSON, missing fields, bad mode, or gold Cypher
            that does not parse.
        DuplicateId: repeated record id.
    """
    records: list[QaRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"invalid JSON: {exc}") from exc
            try:
                rec = QaRecord(
                    id=str(raw["id"]),
                    question=raw["question"],
                    expected_answer=raw["expected_answer"],
                    gold_cypher=raw.get("gold_cypher"),
                    match_mode=raw.get("match_mode", "normalized"),
                    source=raw.get("source", ""),
                )
            except KeyError as exc:
                raise MalformedRecord(lineno, f"missing field {exc}") from exc
            if rec.match_mode not in MATCH_MODES:
                raise MalformedRecord(lineno, f"unknown match_mode {rec.match_mode!r}")
            if rec.id in seen:
                raise DuplicateId(rec.id)
            seen.add(rec.id)
            if rec.gold_cypher is not None:
                try:
                    parse_query(rec.gold_cypher)
                except CypherError as exc:
                    raise MalformedRecord(lineno, f"gold_cypher: {exc}") from exc
            records.append(rec)
    return records


def _tokens(text: str) -> list[str]:
    return re.findall(r"[a-z0-9.,]+", text.casefold().replace("'", ""))


def _first_number(text: str) -> float | None:
    m = _NUMBER_RE.search(text)
    if m is None:
        return None
    return float(m.group().replace(",", ""))


def _numbers_match(a: float, b: float) -> bool:
    ra, rb = round(a, 2), round(b, 2)
    if rb == 0:
        return ra == 0
    return abs(ra - rb) <= 1e-6 * max(abs(ra), abs(rb))


def score_answer(expected: str, actual: str, mode: str = "normalized") -> tuple[bool, str]:
    """Compare an answer with the expectation under the given mode.

    normalized: every expected content token must appear in the actual text,
    numbers compared after rounding to 2 decimals. numeric: first numbers of
    both compared with relative tolerance 1e-6 after 2-decimal rounding.
    contains: case-folded substring.
    """
    if mode == "contains":
        ok = expected.casefold().strip() in actual.casefold()
        return ok, "" if ok else "answer_mismatch"
    if mode == "numeric":
        en, an = _first_number(expected), _first_number(actual)
        if en is None or an is None:
            return False, "answer_mismatch"
        ok = _numbers_match(an, en)
        return ok, "" if ok else "answer_mismatch"
    if mode == "normalized":
        actual_tokens = _tokens(actual)
        actual_set = set(actual_tokens)
        actual_numbers = [
            n for t in actual_tokens if (n := _first_number(t)) is not None
        ]
        for token in _tokens(expected):
            stripped = token.strip(".,")
            if stripped in _STOPWORDS:
                continue
            num = _first_number(token)
            if num is not None:
                if not any(_numbers_match(a, num) for a in actual_numbers):
                    return False, "answer_mismatch"
                continue
            if stripped not in actual_set and not any(
                stripped == a.strip(".,") for a in actual_set
            ):
                return False, "answer_mismatch"
        return True, ""
    raise ValueError(f"unknown match mode {mode!r}")


def run_benchmark(
    records: list[QaRecord],
    backend,
    bundle: PromptBundle,
    graph: PropertyGraph,
) -> QaReport:
    """Ask every record sequentially and score the answers.

    Backend failures never abort the run; they become per-record verdicts.
    Failure classes partition failing records: cypher_generation, execution,
    empty_context, answer_mismatch.
    """
    report = QaReport()
    passes = 0
    for rec in records:
        trace = ask(backend, bundle, graph, rec.question)
        if trace.outcome == "failed":
            reason = "cypher_generation" if not trace.cypher else "execution"
            verdict = Verdict(
                rec.id, trace.outcome, trace.cypher, trace.context,
                trace.final_answer, False, reason,
            )
        else:
            passed, reason = score_answer(
                rec.expected_answer, trace.final_answer, rec.match_mode
            )
            if not passed and trace.final_answer == NO_ANSWER:
                reason = "empty_context"
            verdict = Verdict(
                rec.id, trace.outcome, trace.cypher, trace.context,
                trace.final_answer, passed, reason if not passed else "",
            )
        if verdict.passed:
            passes += 1
        else:
            report.failure_counts[verdict.reason] = (
                report.failure_counts.get(verdict.reason, 0) + 1
            )
        report.verdicts.append(verdict)
    if records:
        report.accuracy = Fraction(passes, len(records))
    return report


def accuracy_from_verdicts(passes: int, total: int) -> Fraction | None:
    """Reporting-path arithmetic used by synthetic verdict checks."""
    if total == 0:
        return None
    return Fraction(passes, total)
