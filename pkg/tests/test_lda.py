"""Tokenization, Gibbs-sampled topic models, and topic statement emission.

The single-topic model admits a closed form (every token lands in topic 0,
so the word distribution is just smoothed corpus frequency); that oracle
pins the count bookkeeping without reference to the sampler.
"""

from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from literal_forge import IRI, Modality
from literal_forge.textlda import (
    Corpus,
    LdaSpec,
    build_corpus,
    document_topics,
    emit_topic_triples,
    tokenize,
    train_lda,
    txtlda,
)

from util import EX, NEW, make_graph, text_line


def text_group(graph, predicate="abstract"):
    return graph.literal_groups[(graph.relation_ids[EX + predicate], Modality.TEXT)]


# --- tokenization -----------------------------------------------------------


def test_tokenize_casefolds_and_splits():
    assert tokenize("Mannheim, officially the University City") == [
        "mannheim",
        "officially",
        "the",
        "university",
        "city",
    ]


def test_tokenize_drops_short_tokens():
    assert tokenize("a to b or I x2") == ["to", "or", "x2"]


def test_tokenize_splits_on_underscore_keeps_digits():
    assert tokenize("foo_bar 42 naive") == ["foo", "bar", "42", "naive"]


def test_tokenize_stopwords_by_language_tag():
    stop = {"en": ["the", "of"], "de": ["der", "die", "das"]}
    assert tokenize("The City of Mannheim", "en", stop) == ["city", "mannheim"]
    assert tokenize("The City of Mannheim", "en-US", stop) == ["city", "mannheim"]
    assert tokenize("Die Stadt Mannheim", "de", stop) == ["stadt", "mannheim"]
    # unknown tag or no tag: nothing removed
    assert tokenize("the city", "fr", stop) == ["the", "city"]
    assert tokenize("the city", None, stop) == ["the", "city"]


def test_tokenize_empty_results():
    assert tokenize("!!! ... ???") == []
    assert tokenize("") == []


# --- corpus -----------------------------------------------------------------


def test_build_corpus_first_encounter_vocabulary():
    graph = make_graph(
        [
            text_line("a", "abstract", "alpha beta alpha"),
            text_line("b", "abstract", "beta gamma"),
        ]
    )
    corpus = build_corpus(text_group(graph))
    assert corpus.vocabulary == ("alpha", "beta", "gamma")
    assert corpus.documents == [[0, 1, 0], [1, 2]]
    assert corpus.num_documents == 2
    assert corpus.empty_documents == []


def test_build_corpus_flags_empty_documents():
    graph = make_graph(
        [
            text_line("a", "abstract", "real words here"),
            text_line("b", "abstract", "... !!!"),
        ]
    )
    corpus = build_corpus(text_group(graph))
    assert corpus.empty_documents == [1]


def test_build_corpus_applies_stopwords():
    graph = make_graph([text_line("a", "abstract", "the quick fox")])
    corpus = build_corpus(text_group(graph), stopwords={"en": ["the"]})
    assert corpus.vocabulary == ("quick", "fox")


# --- training ---------------------------------------------------------------


def test_single_topic_matches_frequency_oracle():
    graph = make_graph(
        [
            text_line("a", "abstract", "wine wine cheese"),
            text_line("b", "abstract", "wine bread"),
            text_line("c", "abstract", "cheese bread bread"),
        ]
    )
    corpus = build_corpus(text_group(graph))
    beta = 0.01
    model = train_lda(corpus, topics=1, beta=beta, iterations=3, seed=11)
    # counts: wine 3, cheese 2, bread 3; total 8; V = 3
    counts = np.zeros(corpus.vocab_size)
    for doc in corpus.documents:
        for w in doc:
            counts[w] += 1
    expected_phi = (counts + beta) / (counts.sum() + corpus.vocab_size * beta)
    assert np.allclose(model.phi[0], expected_phi, atol=1e-12)
    assert np.allclose(model.theta, 1.0, atol=1e-12)


def test_distributions_normalized():
    graph = make_graph(
        [text_line(f"s{i}", "abstract", f"word{i} word{i + 1} shared") for i in range(6)]
    )
    corpus = build_corpus(text_group(graph))
    model = train_lda(corpus, topics=3, iterations=30, seed=5)
    assert np.allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(model.theta.sum(axis=1), 1.0, atol=1e-9)
    assert (model.phi > 0).all() and (model.theta > 0).all()


def test_training_is_deterministic():
    graph = make_graph(
        [text_line(f"s{i}", "abstract", "alpha beta gamma delta " * 3) for i in range(5)]
    )
    corpus = build_corpus(text_group(graph))
    m1 = train_lda(corpus, topics=3, iterations=40, seed=42)
    m2 = train_lda(corpus, topics=3, iterations=40, seed=42)
    assert np.array_equal(m1.phi, m2.phi)
    assert np.array_equal(m1.theta, m2.theta)


def test_empty_document_gets_uniform_prior():
    corpus = Corpus(documents=[[0, 1], []], vocabulary=("x", "y"), statement_subjects=[0, 1])
    model = train_lda(corpus, topics=4, iterations=5, seed=0)
    assert np.allclose(model.theta[1], 0.25)


def test_all_empty_corpus_rejected():
    corpus = Corpus(documents=[[], []], vocabulary=(), statement_subjects=[0, 1])
    with pytest.raises(ValueError):
        train_lda(corpus, topics=2)


def test_more_topics_than_documents_warns(caplog):
    corpus = Corpus(documents=[[0, 0, 1]], vocabulary=("x", "y"), statement_subjects=[0])
    with caplog.at_level(logging.WARNING):
        train_lda(corpus, topics=5, iterations=2, seed=0)
    assert any("exceeds" in r.message for r in caplog.records)


SPORT = "football stadium goal striker keeper referee"
SCIENCE = "molecule reaction catalyst electron proton isotope"


def separable_graph():
    lines = []
    for i in range(10):
        lines.append(text_line(f"match{i}", "abstract", (SPORT + " ") * 2))
        lines.append(text_line(f"article{i}", "abstract", (SCIENCE + " ") * 2))
    return make_graph(lines)


@pytest.mark.parametrize("seed", range(5))
def test_separable_corpus_converges_to_dominant_topics(seed):
    graph = separable_graph()
    corpus = build_corpus(text_group(graph))
    model = train_lda(corpus, topics=2, alpha=0.5, iterations=150, seed=seed)
    dominant = model.theta.argmax(axis=1)
    strength = model.theta.max(axis=1)
    assert (strength > 0.9).all()
    sport_docs = dominant[0::2]
    science_docs = dominant[1::2]
    assert len(set(sport_docs)) == 1
    assert len(set(science_docs)) == 1
    assert sport_docs[0] != science_docs[0]


def test_top_words_reflect_topic_content():
    graph = separable_graph()
    corpus = build_corpus(text_group(graph))
    model = train_lda(corpus, topics=2, alpha=0.5, iterations=150, seed=1)
    tops = model.top_words(6)
    joined = [set(words) for words in tops]
    assert set(SPORT.split()) in joined
    assert set(SCIENCE.split()) in joined


def test_document_topics_accessor():
    corpus = Corpus(documents=[[0, 1]], vocabulary=("x", "y"), statement_subjects=[0])
    model = train_lda(corpus, topics=2, iterations=3, seed=0)
    row = document_topics(model, 0)
    assert row.shape == (2,)
    row[0] = 99.0  # a copy: the model must not change
    assert model.theta[0, 0] != 99.0
    with pytest.raises(ValueError):
        document_topics(model, 1)


# --- spec -------------------------------------------------------------------


def test_lda_spec_defaults_and_validation():
    spec = LdaSpec()
    assert spec.topics == 20
    assert spec.effective_alpha == pytest.approx(2.5)
    assert LdaSpec(topics=10).effective_alpha == pytest.approx(5.0)
    assert LdaSpec(alpha=0.3).effective_alpha == 0.3
    for bad in (
        dict(topics=0),
        dict(iterations=0),
        dict(threshold=0.0),
        dict(threshold=1.5),
    ):
        with pytest.raises(ValueError):
            LdaSpec(**bad)


# --- emission ---------------------------------------------------------------


def test_emit_links_topics_above_threshold():
    graph = separable_graph()
    group = text_group(graph)
    corpus = build_corpus(group)
    model = train_lda(corpus, topics=2, alpha=0.5, iterations=150, seed=0)
    aug = emit_topic_triples(group, graph, model, corpus, NEW, threshold=0.10)
    assert aug.delta_statements >= len(group)  # at least one topic each
    assert aug.delta_statements <= 2 * len(group)
    assert set(aug.entities) <= {NEW + "abstractTopic00", NEW + "abstractTopic01"}
    # weights carry the topic probabilities
    assert all(w is not None and 0.0 < w <= 1.0 for w in aug.weights)
    for t, w in zip(aug.triples, aug.weights):
        assert w > 0.10 or w == pytest.approx(0.10, abs=1e-9)


def test_emit_entity_names_zero_padded():
    graph = make_graph([text_line("a", "abstract", "just some words here")])
    group = text_group(graph)
    corpus = build_corpus(group)
    model = train_lda(corpus, topics=12, alpha=0.1, iterations=10, seed=0)
    aug = emit_topic_triples(group, graph, model, corpus, NEW, threshold=0.99)
    # below-threshold document still links to its single best topic
    assert len(aug.triples) == 1
    name = aug.triples[0].object.value
    assert name.startswith(NEW + "abstractTopic")
    assert len(name.removeprefix(NEW + "abstractTopic")) == 2


def test_emit_wide_topic_count_widens_padding():
    graph = make_graph([text_line("a", "abstract", "alpha beta gamma delta epsilon")])
    group = text_group(graph)
    corpus = build_corpus(group)
    model = train_lda(corpus, topics=120, alpha=0.05, iterations=5, seed=0)
    aug = emit_topic_triples(group, graph, model, corpus, NEW, threshold=0.9)
    name = aug.triples[0].object.value
    assert len(name.removeprefix(NEW + "abstractTopic")) == 3


def test_emit_empty_document_falls_back():
    graph = make_graph(
        [
            text_line("a", "abstract", "actual words in here"),
            text_line("b", "abstract", "???"),
        ]
    )
    group = text_group(graph)
    corpus = build_corpus(group)
    model = train_lda(corpus, topics=2, alpha=0.5, iterations=20, seed=0)
    aug = emit_topic_triples(group, graph, model, corpus, NEW, threshold=0.10)
    assert aug.fallback_statements == 1
    fallback = [t for t in aug.triples if t.object.value == NEW + "abstractAnyValue"]
    assert len(fallback) == 1
    assert fallback[0].subject == IRI(EX + "b")
    assert any("empty after tokenization" in w for w in aug.warnings)


@given(st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_threshold_bounds_edges_per_statement(seed):
    graph = separable_graph()
    group = text_group(graph)
    corpus = build_corpus(group)
    model = train_lda(corpus, topics=8, alpha=0.5, iterations=10, seed=seed)
    aug = emit_topic_triples(group, graph, model, corpus, NEW, threshold=0.10)
    per_subject: dict[str, int] = {}
    for t in aug.triples:
        per_subject[t.subject.value] = per_subject.get(t.subject.value, 0) + 1
    # probabilities sum to one, so at most 10 topics clear a 10% threshold
    assert all(1 <= n <= 10 for n in per_subject.values())


# --- full strategy ----------------------------------------------------------


def test_txtlda_full_run():
    graph = separable_graph()
    aug, model = txtlda(
        text_group(graph), graph, LdaSpec(topics=2, alpha=0.5, iterations=150), NEW, seed=3
    )
    assert model is not None
    assert aug.delta_entities <= 2
    assert aug.delta_statements >= 20


def test_txtlda_untrainable_group_degrades():
    graph = make_graph(
        [text_line("a", "abstract", "!"), text_line("b", "abstract", "?")]
    )
    aug, model = txtlda(text_group(graph), graph, LdaSpec(topics=2), NEW)
    assert model is None
    assert aug.fallback_statements == 2
    assert {t.object.value for t in aug.triples} == {NEW + "abstractAnyValue"}
    assert any("no tokenizable text" in w for w in aug.warnings)
