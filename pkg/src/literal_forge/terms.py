"""RDF term and triple types with N-Triples-level validation.

Terms are immutable and hashable so they can be dictionary-encoded and
deduplicated freely. A literal always carries exactly one datatype IRI:
plain literals default to xsd:string, language-tagged ones to rdf:langString.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"

XSD_STRING = XSD + "string"
XSD_DATE = XSD + "date"
XSD_DATETIME = XSD + "dateTime"
XSD_GYEAR = XSD + "gYear"
XSD_GYEARMONTH = XSD + "gYearMonth"
XSD_BASE64 = XSD + "base64Binary"
XSD_ANYURI = XSD + "anyURI"
RDF_LANGSTRING = RDF + "langString"

#: xsd numeric datatypes (integer family, decimal, float, double).
NUMERIC_DATATYPES = frozenset(
    XSD + name
    for name in (
        "integer",
        "decimal",
        "float",
        "double",
        "long",
        "int",
        "short",
        "byte",
        "nonNegativeInteger",
        "nonPositiveInteger",
        "positiveInteger",
        "negativeInteger",
        "unsignedLong",
        "unsignedInt",
        "unsignedShort",
        "unsignedByte",
    )
)

TEMPORAL_DATATYPES = frozenset((XSD_DATE, XSD_DATETIME, XSD_GYEAR, XSD_GYEARMONTH))

TEXT_DATATYPES = frozenset((XSD_STRING, RDF_LANGSTRING))

# Characters forbidden inside an IRIREF by the N-Triples grammar.
_IRI_BAD = re.compile(r'[\x00-\x20<>"{}|^`\\]')
# Absolute IRIs start with a scheme.
_IRI_SCHEME = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
# N-Triples blank node label (practical ASCII subset; no leading/trailing dot).
_BNODE_LABEL = re.compile(r"[A-Za-z0-9_](?:[A-Za-z0-9_.:\-]*[A-Za-z0-9_:\-])?$")
_LANG_TAG = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*$")


class TermError(ValueError):
    """A term violates the N-Triples term invariants."""


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __str__(self) -> str:
        if self.language is not None:
            return f'"{self.lexical}"@{self.language}'
        if self.datatype == XSD_STRING:
            return f'"{self.lexical}"'
        return f'"{self.lexical}"^^<{self.datatype}>'


Term = IRI | BlankNode | Literal


def validate_term(term: Term) -> None:
    """Raise TermError if *term* breaks an invariant, naming the offender."""
    if isinstance(term, IRI):
        if not term.value:
            raise TermError("empty IRI")
        if _IRI_BAD.search(term.value):
            raise TermError(f"IRI contains forbidden character: {term}")
        if not _IRI_SCHEME.match(term.value):
            raise TermError(f"IRI is not absolute (no scheme): {term}")
    elif isinstance(term, BlankNode):
        if not _BNODE_LABEL.match(term.label):
            raise TermError(f"invalid blank node label: _:{term.label}")
    elif isinstance(term, Literal):
        if term.language is not None:
            if not _LANG_TAG.match(term.language):
                raise TermError(f"invalid language tag: @{term.language}")
            if term.datatype != RDF_LANGSTRING:
                raise TermError(
                    f"language-tagged literal must have rdf:langString datatype: {term}"
                )
        else:
            if term.datatype == RDF_LANGSTRING:
                raise TermError(f"rdf:langString literal without language tag: {term}")
            if not term.datatype or _IRI_BAD.search(term.datatype):
                raise TermError(f"invalid datatype IRI: {term.datatype!r}")
    else:
        raise TermError(f"not an RDF term: {term!r}")


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def validate(self) -> None:
        """Check statement-position constraints on top of term invariants."""
        validate_term(self.subject)
        validate_term(self.predicate)
        validate_term(self.object)
        if isinstance(self.subject, Literal):
            raise TermError(f"literal in subject position: {self.subject}")
        if not isinstance(self.predicate, IRI):
            raise TermError(f"predicate must be an IRI: {self.predicate}")


def local_name(iri: str) -> str:
    """Tail of an IRI after the last '#' or '/' (the whole IRI if neither)."""
    for sep in ("#", "/"):
        idx = iri.rfind(sep)
        if 0 <= idx < len(iri) - 1:
            return iri[idx + 1 :]
    return iri
