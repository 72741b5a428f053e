"""Image statement rewriting through a pluggable tagging provider.

Classifier inference is out of process: a provider maps an image reference
(an external IRI or an embedded base64 payload) to a ranked label
distribution. The reference provider reads a precomputed tag-map file; a
remote HTTP provider calls a classifier endpoint. Each image statement is
replaced by one link to a minted label entity such as VGG_building.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Protocol

from .baselines import Augmentation, DEFAULT_NAMESPACE, mint_any_value_triple, sanitize_value, subject_term
from .graph import IndexedGraph, LiteralGroup
from .terms import IRI, Literal, Triple, XSD_BASE64

log = logging.getLogger(__name__)

DEFAULT_LABEL_PREFIX = "VGG_"


class ProviderError(RuntimeError):
    """The provider could not answer at all (endpoint down, bad map file)."""


@dataclass(frozen=True)
class ImageRef:
    """One image statement: either an external IRI or embedded bytes."""

    subject_id: int
    statement_index: int
    iri: str | None = None
    payload: bytes | None = None

    def __post_init__(self) -> None:
        if self.iri is None and self.payload is None:
            raise ValueError("image reference needs an IRI or a payload")
        if self.iri is not None and not self.iri:
            raise ValueError("image IRI must be non-empty")
        if self.payload is not None and not self.payload:
            raise ValueError("image payload must be non-empty")

    @property
    def key(self) -> str:
        """Lookup key: the IRI, or the SHA-256 hash of embedded bytes."""
        if self.iri is not None:
            return self.iri
        return hashlib.sha256(self.payload).hexdigest()


@dataclass(frozen=True)
class LabelDistribution:
    """Ranked classifier output; scores must be non-increasing."""

    labels: tuple[tuple[str, float], ...]
    provider: str = "unknown"

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError("a label distribution needs at least one label")
        for name, score in self.labels:
            if not name:
                raise ValueError("label names must be non-empty")
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"label score out of range: {score}")
        scores = [s for _, s in self.labels]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("label scores must be non-increasing")


def top_label(distribution: LabelDistribution) -> str:
    """The first-ranked label; exact score ties break lexicographically."""
    best_score = distribution.labels[0][1]
    tied = [name for name, score in distribution.labels if score == best_score]
    return min(tied)


class TagProvider(Protocol):
    def lookup(self, ref: ImageRef) -> LabelDistribution | None: ...


def _parse_labels(raw: object, provider: str) -> LabelDistribution:
    if not isinstance(raw, list) or not raw:
        raise ProviderError(f"{provider}: label list missing or empty")
    labels = []
    for item in raw:
        if isinstance(item, dict):
            name, score = item.get("name"), item.get("score")
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            name, score = item
        elif isinstance(item, str):
            name, score = item, 1.0
        else:
            raise ProviderError(f"{provider}: unreadable label entry {item!r}")
        if not isinstance(name, str) or not isinstance(score, (int, float)):
            raise ProviderError(f"{provider}: unreadable label entry {item!r}")
        labels.append((name, float(score)))
    labels.sort(key=lambda pair: (-pair[1], pair[0]))
    return LabelDistribution(tuple(labels), provider)


@dataclass
class TagMapProvider:
    """Precomputed tags: a JSON object keyed by image IRI or content hash.

    Values are ranked label arrays, either [{"name": ..., "score": ...}, ...]
    or bare [name, ...] pairs/strings.
    """

    mapping: dict[str, LabelDistribution]

    @classmethod
    def from_file(cls, path: str) -> "TagMapProvider":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderError(f"cannot read tag map {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ProviderError(f"tag map {path} must be a JSON object")
        mapping = {
            key: _parse_labels(value, f"tag-map:{path}") for key, value in raw.items()
        }
        return cls(mapping)

    def lookup(self, ref: ImageRef) -> LabelDistribution | None:
        return self.mapping.get(ref.key)


@dataclass
class RemoteTagProvider:
    """HTTP classifier client.

    POSTs {"iri": ...} or {"payload": <base64>} and expects
    {"labels": [{"name": ..., "score": ...}, ...]}. Transient failures are
    retried 3 times with exponential backoff; a miss (404 or empty labels
    with ok status "not_found") returns None.
    """

    endpoint: str
    timeout: float = 10.0
    retries: int = 3
    backoff: float = 0.5
    session: object | None = field(default=None, repr=False)

    def _post(self, body: dict) -> object:
        import requests

        session = self.session
        post = session.post if session is not None else requests.post
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = post(self.endpoint, json=body, timeout=self.timeout)
                if response.status_code == 404:
                    return None
                if response.status_code >= 500:
                    raise ProviderError(
                        f"{self.endpoint} answered {response.status_code}"
                    )
                response.raise_for_status()
                return response.json()
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_exc = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (2**attempt))
        raise ProviderError(f"{self.endpoint} unreachable: {last_exc}") from last_exc

    def lookup(self, ref: ImageRef) -> LabelDistribution | None:
        if ref.iri is not None:
            body = {"iri": ref.iri}
        else:
            body = {"payload": base64.b64encode(ref.payload).decode("ascii")}
        data = self._post(body)
        if data is None:
            return None
        if not isinstance(data, dict) or "labels" not in data:
            raise ProviderError(f"{self.endpoint}: response missing 'labels'")
        if not data["labels"]:
            return None
        return _parse_labels(data["labels"], f"remote:{self.endpoint}")


def resolve_image_refs(group: LiteralGroup) -> list[ImageRef]:
    """One ImageRef per statement, classifying payload kind.

    IRI-valued statements (and IRI-shaped strings) become external refs;
    base64 literals are decoded into embedded payloads. Statements that are
    neither decodable nor IRI-shaped yield no ref and are left to the
    caller's fallback.
    """
    refs: list[ImageRef] = []
    for index, (subject_id, obj) in enumerate(group.statements):
        if isinstance(obj, IRI):
            refs.append(ImageRef(subject_id, index, iri=obj.value))
            continue
        if isinstance(obj, Literal):
            text = obj.lexical.strip()
            if obj.datatype == XSD_BASE64:
                try:
                    payload = base64.b64decode(text, validate=True)
                except (binascii.Error, ValueError):
                    payload = b""
                if payload:
                    refs.append(ImageRef(subject_id, index, payload=payload))
                continue
            if text.startswith(("http://", "https://")):
                refs.append(ImageRef(subject_id, index, iri=text))
    return refs


def _lookup_all(
    provider: TagProvider, refs: list[ImageRef], max_in_flight: int = 8
) -> dict[int, LabelDistribution | None]:
    """Query the provider for every ref, keyed by statement index.

    Remote providers are queried concurrently with a bounded in-flight
    limit; results stay ordered by statement index regardless.
    """
    if len(refs) > 1 and hasattr(provider, "endpoint"):
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            results = list(pool.map(provider.lookup, refs))
        return {ref.statement_index: dist for ref, dist in zip(refs, results)}
    return {ref.statement_index: provider.lookup(ref) for ref in refs}


def emit_image_triples(
    group: LiteralGroup,
    graph: IndexedGraph,
    provider: TagProvider,
    namespace: str = DEFAULT_NAMESPACE,
    prefix: str = DEFAULT_LABEL_PREFIX,
    max_in_flight: int = 8,
) -> Augmentation:
    """Replace each image statement with a link to its top label entity.

    Label entities are shared across statements and predicates. Provider
    misses, undecodable payloads, and lookup errors fall back to a
    one-entity link; every statement yields exactly one output triple.
    """
    aug = Augmentation()
    predicate = IRI(group.predicate)
    refs = resolve_image_refs(group)
    distributions = _lookup_all(provider, refs, max_in_flight)
    misses = 0
    for index, (subject_id, _) in enumerate(group.statements):
        distribution = distributions.get(index)
        if distribution is None:
            mint_any_value_triple(graph, group, subject_id, namespace, aug)
            misses += 1
            continue
        label = top_label(distribution)
        iri = namespace + prefix + sanitize_value(label)
        aug.add_entity(iri)
        aug.triples.append(Triple(subject_term(graph, subject_id), predicate, IRI(iri)))
        aug.weights.append(distribution.labels[0][1])
    if misses:
        aug.fallback_statements = misses
        aug.warnings.append(
            f"{group.predicate}: {misses} image statements without tags got AnyValue links"
        )
    return aug
