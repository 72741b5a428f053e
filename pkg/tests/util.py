"""Shared builders for test graphs."""

from __future__ import annotations

import json

from literal_forge import ModalityRules, build_index, parse_ntriples

EX = "http://ex.org/"
XSD = "http://www.w3.org/2001/XMLSchema#"
NEW = "http://example.org/new/"

MANNHEIM_NT = b"""\
<http://ex.org/Mannheim> <http://ex.org/country> <http://ex.org/Germany> .
<http://ex.org/Mannheim> <http://ex.org/federalState> <http://ex.org/BW> .
<http://ex.org/Mannheim> <http://ex.org/populationMetro> "2362046"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://ex.org/Mannheim> <http://ex.org/foundingDate> "1607-01-24"^^<http://www.w3.org/2001/XMLSchema#date> .
<http://ex.org/Mannheim> <http://ex.org/abstract> "Mannheim, officially the University City of Mannheim, is a city in Baden Wurttemberg"@en .
<http://ex.org/Mannheim> <http://ex.org/depiction> <http://ex.org/img/mannheim.jpg> .
"""

IMAGE_RULES = ModalityRules(image_predicates=frozenset({EX + "depiction"}))


def make_graph(lines: list[str], rules: ModalityRules | None = None):
    data = ("\n".join(lines) + "\n").encode()
    triples, diagnostics = parse_ntriples(data)
    assert not diagnostics, diagnostics
    return build_index(triples, rules or ModalityRules())


def numeric_line(subject: str, predicate: str, value) -> str:
    return f'<{EX}{subject}> <{EX}{predicate}> "{value}"^^<{XSD}decimal> .'


def date_line(subject: str, predicate: str, value: str) -> str:
    return f'<{EX}{subject}> <{EX}{predicate}> "{value}"^^<{XSD}date> .'


def text_line(subject: str, predicate: str, value: str, lang: str = "en") -> str:
    return f'<{EX}{subject}> <{EX}{predicate}> "{value}"@{lang} .'


def rel_line(subject: str, predicate: str, obj: str) -> str:
    return f"<{EX}{subject}> <{EX}{predicate}> <{EX}{obj}> ."


def write_tag_map(path, mapping: dict[str, str]) -> str:
    """Tag-map file with one full-confidence label per image key."""
    payload = {key: [{"name": label, "score": 1.0}] for key, label in mapping.items()}
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)
