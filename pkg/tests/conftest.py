from __future__ import annotations

import json
import warnings

import pytest

from roadq.config import assessment_fis, shipped_path, suggestion_fis
from roadq.errors import ClampWarning
from roadq.ingest import load_network


@pytest.fixture(scope="session")
def assess_fis():
    return assessment_fis()


@pytest.fixture(scope="session")
def suggest_fis():
    return suggestion_fis()


@pytest.fixture
def demo_network():
    return load_network(shipped_path("demo_network.json"))


@pytest.fixture
def suggestion_doc():
    return json.loads(shipped_path("suggestion_fis.json").read_text())


@pytest.fixture
def assessment_doc():
    return json.loads(shipped_path("assessment_fis.json").read_text())


@pytest.fixture
def quiet_clamp():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClampWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import summary_lines
    except ImportError:
        return
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
