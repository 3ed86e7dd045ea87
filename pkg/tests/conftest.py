"""Shared fixtures: fixture paths, parsed files, and built graphs."""

from pathlib import Path

import pytest

from ifcgraph import build, step

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

ALL_IFC = sorted(FIXTURES.glob("*.ifc"))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def paper_twin_path() -> Path:
    return FIXTURES / "paper_twin.ifc"


@pytest.fixture(scope="session")
def paper_twin_file(paper_twin_path) -> step.SourceFile:
    return step.read_ifc(str(paper_twin_path))


@pytest.fixture(scope="session")
def paper_twin_graph(paper_twin_file):
    graph, report, _ = build.build_from_source(paper_twin_file)
    assert not report.unresolved_refs
    return graph
