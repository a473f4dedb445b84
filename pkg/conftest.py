"""Shared fixtures for the test suite."""

from typing import Dict, List, Sequence

import pytest

from src.engine import OutputRow, run_trace
from src.stdlib import compile_source
from src.values import Value, bool_value, int_value


def events_from(**columns: Sequence) -> List[Dict[str, Value]]:
    """Events from equally long columns of Python bools or ints."""
    lengths = {len(column) for column in columns.values()}
    assert len(lengths) == 1
    events = []
    for j in range(lengths.pop()):
        event = {}
        for name, column in columns.items():
            raw = column[j]
            event[name] = raw if isinstance(raw, Value) else (
                bool_value(raw) if isinstance(raw, bool) else int_value(raw))
        events.append(event)
    return events


def column(rows: List[OutputRow], name: str) -> list:
    return [row.values[name].payload for row in rows]


@pytest.fixture(scope="session")
def compile_spec():
    def compile_text(text: str, **options):
        return compile_source(text, "<test>", **options)
    return compile_text


@pytest.fixture(scope="session")
def run_spec():
    def run(spec, events, simplify=True):
        return run_trace(spec, events, simplify=simplify)
    return run


@pytest.fixture(scope="session")
def events():
    return events_from


@pytest.fixture(scope="session")
def values_of():
    return column
