"""Per-predicate LDA topic modeling for text literals.

Each text predicate gets its own corpus (one document per statement) and its
own topic model, trained by collapsed Gibbs sampling. Subjects are then
linked to every topic whose document probability clears the threshold,
default 10%, giving entities like abstractTopic04. Topic probabilities feed
the edge-weight sidecar.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Mapping, Collection

import numpy as np

from .baselines import Augmentation, DEFAULT_NAMESPACE, mint_any_value_triple, sanitize_value, subject_term
from .graph import IndexedGraph, LiteralGroup
from .terms import IRI, Literal, Triple, local_name

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class LdaSpec:
    """Topic model hyperparameters; alpha defaults to 50/T when omitted."""

    topics: int = 20
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 500
    threshold: float = 0.10

    def __post_init__(self) -> None:
        if self.topics < 1:
            raise ValueError("need at least one topic")
        if self.iterations < 1:
            raise ValueError("need at least one sampling iteration")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.topics


def tokenize(
    text: str,
    language: str | None = None,
    stopwords: Mapping[str, Collection[str]] | None = None,
) -> list[str]:
    """Casefold, split on non-alphanumeric runs, drop tokens under 2 chars.

    A stopword table maps language tags to word lists; the tag is matched
    case-insensitively, falling back to its primary subtag (en-US -> en).
    """
    tokens = [t for t in _TOKEN_RE.findall(text.casefold()) if len(t) >= 2]
    if stopwords and language:
        tag = language.casefold()
        words = stopwords.get(tag)
        if words is None and "-" in tag:
            words = stopwords.get(tag.split("-", 1)[0])
        if words:
            drop = {w.casefold() for w in words}
            tokens = [t for t in tokens if t not in drop]
    return tokens


@dataclass
class Corpus:
    """Tokenized documents for one literal group, one document per statement.

    Vocabulary ids are dense and assigned in first-encounter order, so the
    corpus is deterministic for a given group. Documents can be empty after
    tokenization; those are excluded from training and flagged for fallback.
    """

    documents: list[list[int]]
    vocabulary: tuple[str, ...]
    statement_subjects: list[int]

    @property
    def num_documents(self) -> int:
        return len(self.documents)

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    @property
    def empty_documents(self) -> list[int]:
        return [i for i, doc in enumerate(self.documents) if not doc]


def build_corpus(
    group: LiteralGroup,
    stopwords: Mapping[str, Collection[str]] | None = None,
) -> Corpus:
    """Tokenize every statement of a text group into one corpus.

    Language tags select stopword lists but all languages pool into the same
    vocabulary and model.
    """
    vocab_ids: dict[str, int] = {}
    documents: list[list[int]] = []
    subjects: list[int] = []
    for subject_id, obj in group.statements:
        if isinstance(obj, Literal):
            tokens = tokenize(obj.lexical, obj.language, stopwords)
        else:
            tokens = []
        doc = []
        for tok in tokens:
            tid = vocab_ids.get(tok)
            if tid is None:
                tid = len(vocab_ids)
                vocab_ids[tok] = tid
            doc.append(tid)
        documents.append(doc)
        subjects.append(subject_id)
    return Corpus(documents, tuple(vocab_ids), subjects)


@dataclass
class TopicModel:
    """Trained topic model: per-topic word distributions and per-document
    topic distributions, estimated from the final Gibbs state."""

    topics: int
    alpha: float
    beta: float
    phi: np.ndarray  # T x V
    theta: np.ndarray  # D x T
    seed: int
    iterations: int
    vocabulary: tuple[str, ...] = field(default=())

    def top_words(self, k: int = 10) -> list[list[str]]:
        out = []
        for t in range(self.topics):
            order = np.argsort(-self.phi[t], kind="stable")[:k]
            out.append([self.vocabulary[i] for i in order if i < len(self.vocabulary)])
        return out


def train_lda(
    corpus: Corpus,
    topics: int = 20,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 500,
    seed: int = 0,
) -> TopicModel:
    """Collapsed Gibbs sampling over the corpus's non-empty documents.

    Identical corpus, parameters, and seed give identical models. Empty
    documents keep a uniform topic distribution (the prior-only estimate).
    """
    if topics < 1:
        raise ValueError("need at least one topic")
    alpha = alpha if alpha is not None else 50.0 / topics
    non_empty = [i for i, doc in enumerate(corpus.documents) if doc]
    if not non_empty:
        raise ValueError("corpus has no non-empty documents")
    if topics > len(non_empty):
        log.warning(
            "topic count %d exceeds the %d non-empty documents", topics, len(non_empty)
        )

    V = corpus.vocab_size
    D = corpus.num_documents
    T = topics
    doc_of = np.concatenate(
        [np.full(len(corpus.documents[d]), d, dtype=np.int64) for d in non_empty]
    )
    word_of = np.concatenate(
        [np.asarray(corpus.documents[d], dtype=np.int64) for d in non_empty]
    )
    n_tokens = word_of.size

    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.integers(0, T, size=n_tokens)

    n_dk = np.zeros((D, T))
    n_kw = np.zeros((T, V))
    n_k = np.zeros(T)
    np.add.at(n_dk, (doc_of, z), 1.0)
    np.add.at(n_kw, (z, word_of), 1.0)
    np.add.at(n_k, z, 1.0)

    v_beta = V * beta
    for _ in range(iterations):
        draws = rng.random(n_tokens)
        for i in range(n_tokens):
            d = doc_of[i]
            w = word_of[i]
            k = z[i]
            n_dk[d, k] -= 1.0
            n_kw[k, w] -= 1.0
            n_k[k] -= 1.0
            p = (n_dk[d] + alpha) * (n_kw[:, w] + beta) / (n_k + v_beta)
            cum = np.cumsum(p)
            k = int(np.searchsorted(cum, draws[i] * cum[-1], side="right"))
            if k >= T:
                k = T - 1
            z[i] = k
            n_dk[d, k] += 1.0
            n_kw[k, w] += 1.0
            n_k[k] += 1.0

    phi = (n_kw + beta) / (n_k[:, None] + v_beta)
    doc_lengths = np.array([len(doc) for doc in corpus.documents], dtype=float)
    theta = (n_dk + alpha) / (doc_lengths[:, None] + T * alpha)
    return TopicModel(T, alpha, beta, phi, theta, seed, iterations, corpus.vocabulary)


def document_topics(model: TopicModel, document_id: int) -> np.ndarray:
    """The trained topic distribution of one document."""
    if not 0 <= document_id < model.theta.shape[0]:
        raise ValueError(f"unknown document id: {document_id}")
    return model.theta[document_id].copy()


def emit_topic_triples(
    group: LiteralGroup,
    graph: IndexedGraph,
    model: TopicModel,
    corpus: Corpus,
    namespace: str = DEFAULT_NAMESPACE,
    threshold: float = 0.10,
) -> Augmentation:
    """Link each statement's subject to every topic at or above the threshold.

    Statements whose best topic stays below the threshold still link to that
    single best topic, so no statement silently disappears. Statements empty
    after tokenization fall back to a one-entity link. Topic probabilities
    are recorded as edge weights.
    """
    aug = Augmentation()
    pred_local = sanitize_value(local_name(group.predicate))
    width = max(2, len(str(model.topics - 1)))
    predicate = IRI(group.predicate)
    empty = set(corpus.empty_documents)
    fallback_count = 0
    for doc_id, (subject_id, _) in enumerate(group.statements):
        if doc_id in empty:
            mint_any_value_triple(graph, group, subject_id, namespace, aug)
            fallback_count += 1
            continue
        row = model.theta[doc_id]
        hits = [k for k in range(model.topics) if row[k] >= threshold]
        if not hits:
            hits = [int(np.argmax(row))]
        subj = subject_term(graph, subject_id)
        for k in hits:
            iri = f"{namespace}{pred_local}Topic{k:0{width}d}"
            aug.add_entity(iri)
            aug.triples.append(Triple(subj, predicate, IRI(iri)))
            aug.weights.append(float(row[k]))
    if fallback_count:
        aug.fallback_statements = fallback_count
        aug.warnings.append(
            f"{group.predicate}: {fallback_count} statements empty after tokenization got AnyValue links"
        )
    return aug


def txtlda(
    group: LiteralGroup,
    graph: IndexedGraph,
    spec: LdaSpec | None = None,
    namespace: str = DEFAULT_NAMESPACE,
    seed: int = 0,
    stopwords: Mapping[str, Collection[str]] | None = None,
) -> tuple[Augmentation, TopicModel | None]:
    """The full text strategy: corpus, model, topic triples.

    A group with nothing to train on (every document empty) degrades to
    one-entity links for all statements.
    """
    spec = spec if spec is not None else LdaSpec()
    corpus = build_corpus(group, stopwords)
    if not any(corpus.documents):
        aug = Augmentation()
        for subject_id, _ in group.statements:
            mint_any_value_triple(graph, group, subject_id, namespace, aug)
        aug.fallback_statements = len(group.statements)
        aug.warnings.append(
            f"{group.predicate}: no tokenizable text, all statements got AnyValue links"
        )
        return aug, None
    model = train_lda(
        corpus,
        topics=spec.topics,
        alpha=spec.alpha,
        beta=spec.beta,
        iterations=spec.iterations,
        seed=seed,
    )
    aug = emit_topic_triples(group, graph, model, corpus, namespace, spec.threshold)
    return aug, model
