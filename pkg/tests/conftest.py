"""Shared fixtures: a small graph touching every literal modality."""

from __future__ import annotations

import pytest

from literal_forge import build_index, parse_ntriples

from util import IMAGE_RULES, MANNHEIM_NT


@pytest.fixture
def mannheim_triples():
    triples, diagnostics = parse_ntriples(MANNHEIM_NT)
    assert not diagnostics
    return triples


@pytest.fixture
def mannheim_graph(mannheim_triples):
    return build_index(mannheim_triples, IMAGE_RULES)
