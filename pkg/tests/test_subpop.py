"""Signature-based subpopulation splitting and divergence machinery."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from literal_forge import Modality
from literal_forge.binning import BinningSpec
from literal_forge.subpop import (
    MIN_DIVERGENCE,
    REL,
    RELENT,
    RelationDistribution,
    entity_signature,
    kl_divergence,
    kl_rel_binning,
    relation_distribution,
    split_population,
)

from util import EX, NEW, make_graph, numeric_line, rel_line


def height_group(graph):
    return graph.literal_groups[(graph.relation_ids[EX + "height"], Modality.NUMERIC)]


def person_building_lines(persons=400, buildings=400):
    """Two structurally distinct kinds sharing one numeric predicate."""
    lines = []
    for i in range(persons):
        lines.append(rel_line(f"person{i}", "birthPlace", f"city{i % 10}"))
        lines.append(numeric_line(f"person{i}", "height", 1.5 + (i % 50) / 100.0))
    for i in range(buildings):
        lines.append(rel_line(f"building{i}", "locatedIn", f"city{i % 10}"))
        lines.append(numeric_line(f"building{i}", "height", 10.0 + (i % 90)))
    return lines


# --- signatures -------------------------------------------------------------


def test_signature_collects_both_directions_without_literals():
    graph = make_graph(
        [
            rel_line("a", "knows", "b"),
            rel_line("c", "admires", "a"),
            numeric_line("a", "height", 1.8),
        ]
    )
    a = graph.entity_ids[graph.entity_terms[0]]
    sig = entity_signature(a, graph, REL)
    assert sig == frozenset({EX + "knows", EX + "admires"})


def test_relent_signature_pairs_relation_with_neighbor():
    graph = make_graph([rel_line("a", "knows", "b"), rel_line("a", "knows", "c")])
    a = 0
    sig = entity_signature(a, graph, RELENT)
    assert sig == frozenset({(EX + "knows", EX + "b"), (EX + "knows", EX + "c")})


def test_signature_of_isolated_subject_is_empty():
    graph = make_graph([numeric_line("a", "height", 1.8)])
    assert entity_signature(0, graph, REL) == frozenset()


# --- distributions ----------------------------------------------------------


def test_distribution_matches_hand_counts():
    # 3 subjects: two with knows, one with knows+admires
    graph = make_graph(
        [
            rel_line("a", "knows", "x"),
            rel_line("b", "knows", "x"),
            rel_line("c", "knows", "x"),
            rel_line("c", "admires", "x"),
        ]
    )
    ids = [graph.entity_ids[t] for t in graph.entity_terms if t.value in (EX + "a", EX + "b", EX + "c")]
    dist = relation_distribution(ids, graph, REL)
    assert dist.vocabulary == (EX + "admires", EX + "knows")
    eps = 1.0 / (10 * 2)
    expected = np.array([1 + eps, 3 + eps])
    expected /= expected.sum()
    assert np.allclose(dist.probs, expected, atol=1e-12)
    assert dist.epsilon == eps


def test_distribution_single_relation_near_one():
    graph = make_graph([rel_line(f"s{i}", "r", "t") for i in range(5)])
    ids = [graph.entity_ids[t] for t in graph.entity_terms if t.value.startswith(EX + "s")]
    dist = relation_distribution(ids, graph, REL)
    assert dist.vocabulary == (EX + "r",)
    assert dist.probs[0] == pytest.approx(1.0)


def test_distribution_explicit_vocabulary_aligns_support():
    graph = make_graph([rel_line("a", "p", "x"), rel_line("b", "q", "x")])
    a = graph.entity_ids[graph.entity_terms[0]]
    vocab = (EX + "p", EX + "q")
    dist = relation_distribution([a], graph, REL, vocabulary=vocab)
    assert dist.vocabulary == vocab
    assert dist.probs.sum() == pytest.approx(1.0)
    assert dist.probs[0] > dist.probs[1] > 0.0  # smoothing keeps q positive


def test_distribution_errors():
    graph = make_graph([numeric_line("a", "height", 1.0)])
    with pytest.raises(ValueError):
        relation_distribution([], graph, REL)
    with pytest.raises(ValueError):
        relation_distribution([0], graph, REL)  # isolated: no features at all


# --- divergence -------------------------------------------------------------


def dist(vocab, probs):
    return RelationDistribution(tuple(vocab), np.asarray(probs, dtype=float), 0.0)


def test_kl_identity_is_zero():
    p = dist("ab", [0.5, 0.5])
    assert kl_divergence(p, p) == 0.0


def test_kl_half_half_versus_nine_one():
    p = dist("ab", [0.5, 0.5])
    q = dist("ab", [0.9, 0.1])
    # 0.5·ln(0.5/0.9) + 0.5·ln(0.5/0.1)
    assert kl_divergence(p, q) == pytest.approx(0.5108, abs=1e-4)
    assert kl_divergence(q, p) != pytest.approx(kl_divergence(p, q), abs=1e-3)


def test_kl_mismatched_vocabulary_errors():
    with pytest.raises(ValueError):
        kl_divergence(dist("ab", [0.5, 0.5]), dist("ac", [0.5, 0.5]))


@given(
    st.lists(st.integers(0, 50), min_size=2, max_size=6),
    st.lists(st.integers(0, 50), min_size=2, max_size=6),
)
@settings(max_examples=200, deadline=None)
def test_kl_nonnegative_on_smoothed_pairs(c1, c2):
    size = min(len(c1), len(c2))
    vocab = tuple(f"f{i}" for i in range(size))
    from literal_forge.subpop import _smooth

    p = _smooth(np.array(c1[:size], dtype=float), vocab)
    q = _smooth(np.array(c2[:size], dtype=float), vocab)
    d = kl_divergence(p, q)
    assert d >= -1e-12  # Gibbs' inequality
    if np.allclose(p.probs, q.probs):
        assert d == pytest.approx(0.0, abs=1e-12)


# --- splitting --------------------------------------------------------------


def test_two_kinds_split_exactly():
    graph = make_graph(person_building_lines())
    split = split_population(height_group(graph), graph, REL, threshold=300)
    assert split.root.feature == EX + "birthPlace"  # lexicographic winner of the tie
    assert split.root.divergence is not None and split.root.divergence > 0
    assert len(split.leaves) == 2
    person_leaf, building_leaf = split.leaves
    person_terms = {graph.entity_terms[s].value for s in person_leaf.subjects}
    building_terms = {graph.entity_terms[s].value for s in building_leaf.subjects}
    assert all(t.startswith(EX + "person") for t in person_terms)
    assert all(t.startswith(EX + "building") for t in building_terms)
    assert person_leaf.value_count == building_leaf.value_count == 400
    # each side is homogeneous: nothing separates it further
    assert person_leaf.indivisible and building_leaf.indivisible


def test_below_threshold_stays_single_leaf():
    graph = make_graph(person_building_lines(150, 149))
    split = split_population(height_group(graph), graph, REL, threshold=300)
    assert split.root.is_leaf
    assert len(split.leaves) == 1
    assert split.root.value_count == 299
    assert not split.root.indivisible


def test_identical_signatures_indivisible_regardless_of_size():
    lines = []
    for i in range(400):
        lines.append(rel_line(f"s{i}", "kind", "thing"))
        lines.append(numeric_line(f"s{i}", "height", float(i)))
    graph = make_graph(lines)
    split = split_population(height_group(graph), graph, REL, threshold=300)
    assert split.root.is_leaf
    assert split.root.indivisible


def test_threshold_counts_values_not_subjects():
    # 100 subjects x 3 values each = 300 values: at threshold, still splits
    lines = []
    for i in range(50):
        lines.append(rel_line(f"person{i}", "birthPlace", "city"))
        for j in range(3):
            lines.append(numeric_line(f"person{i}", "height", 1.5 + j / 10 + i / 1000))
    for i in range(50):
        lines.append(rel_line(f"building{i}", "locatedIn", "city"))
        for j in range(3):
            lines.append(numeric_line(f"building{i}", "height", 10.0 + j + i / 10))
    graph = make_graph(lines)
    split = split_population(height_group(graph), graph, REL, threshold=300)
    assert split.root.value_count == 300
    assert not split.root.is_leaf


def test_leaf_of_routes_every_subject():
    graph = make_graph(person_building_lines(200, 200))
    group = height_group(graph)
    split = split_population(group, graph, REL, threshold=100)
    for leaf in split.leaves:
        for sid in leaf.subjects:
            assert split.leaf_of(sid) == leaf.leaf_index


def test_relent_rare_features_pruned():
    # the unique (admires, z) pair must not become a split candidate
    lines = [
        rel_line("a", "knows", "x"),
        rel_line("b", "knows", "x"),
        rel_line("c", "knows", "y"),
        rel_line("d", "knows", "y"),
        rel_line("a", "admires", "z"),
    ]
    for name in "abcd":
        lines.append(numeric_line(name, "height", float(ord(name))))
    graph = make_graph(lines)
    split = split_population(height_group(graph), graph, RELENT, threshold=1)
    assert split.root.feature == (EX + "knows", EX + "x")
    internal_features = set()

    def walk(node):
        if not node.is_leaf:
            internal_features.add(node.feature)
            for c in node.children:
                walk(c)

    walk(split.root)
    assert (EX + "admires", EX + "z") not in internal_features


def test_unknown_mode_rejected():
    graph = make_graph(person_building_lines(2, 2))
    with pytest.raises(ValueError):
        split_population(height_group(graph), graph, "RELISH")


def test_split_is_deterministic():
    lines = person_building_lines(120, 130)
    a = make_graph(lines)
    b = make_graph(lines)
    sa = split_population(height_group(a), a, REL, threshold=50)
    sb = split_population(height_group(b), b, REL, threshold=50)
    assert sa.root.to_dict() == sb.root.to_dict()


@st.composite
def _random_population(draw):
    n = draw(st.integers(4, 18))
    lines = []
    rels = ["r0", "r1", "r2"]
    for i in range(n):
        for r in rels:
            if draw(st.booleans()):
                lines.append(rel_line(f"s{i}", r, f"t{draw(st.integers(0, 2))}"))
        for _ in range(draw(st.integers(1, 3))):
            lines.append(numeric_line(f"s{i}", "height", draw(st.integers(0, 100))))
    return lines


@given(_random_population(), st.integers(1, 10))
@settings(max_examples=80, deadline=None)
def test_split_invariants(lines, threshold):
    graph = make_graph(lines)
    group = height_group(graph)
    split = split_population(group, graph, REL, threshold=threshold)
    # leaves partition the subjects
    seen = []
    for leaf in split.leaves:
        seen.extend(leaf.subjects)
    assert sorted(seen) == sorted(split.root.subjects)
    assert len(set(seen)) == len(seen)
    # value counts add up
    assert sum(leaf.value_count for leaf in split.leaves) == split.root.value_count
    assert split.root.value_count == len(group)
    # stop condition: small or genuinely unsplittable
    for leaf in split.leaves:
        assert leaf.value_count < threshold or leaf.indivisible
    # internal nodes recorded informative splits
    def walk(node):
        if node.is_leaf:
            return
        assert node.divergence >= MIN_DIVERGENCE
        left, right = node.children
        assert left.subjects and right.subjects
        walk(left)
        walk(right)

    walk(split.root)


# --- composition with binning -----------------------------------------------


def test_kl_rel_binning_bins_each_leaf_separately():
    graph = make_graph(person_building_lines())
    group = height_group(graph)
    aug, split = kl_rel_binning(
        group, graph, REL, BinningSpec(bins=3), NEW, threshold=300
    )
    assert len(split.leaves) == 2
    assert aug.delta_statements == len(group)
    assert aug.delta_entities == 6
    assert set(aug.entities) == {
        NEW + f"heightSub{s}Bin{i:02d}" for s in (0, 1) for i in range(3)
    }
    # person heights (≈1.5..2.0) never land in building bins (10..100)
    person_objs = {
        t.object.value for t in aug.triples if t.subject.value.startswith(EX + "person")
    }
    assert all("Sub0" in o for o in person_objs)


def test_single_leaf_reduces_to_plain_binning():
    from literal_forge.binning import nbins

    lines = [numeric_line(f"s{i}", "height", float(i)) for i in range(20)]
    graph = make_graph(lines)
    group = height_group(graph)
    aug, split = kl_rel_binning(group, graph, REL, BinningSpec(bins=4), NEW, threshold=300)
    assert len(split.leaves) == 1
    plain = nbins(group, graph, BinningSpec(bins=4), NEW)
    assert aug.triples == plain.triples
    assert aug.entities == plain.entities
    assert aug.structural_triples == plain.structural_triples


def test_kl_rel_binning_unparseable_fall_back():
    lines = [numeric_line(f"s{i}", "height", float(i)) for i in range(10)]
    lines.append(f'<{EX}bad> <{EX}height> "tall"^^<http://www.w3.org/2001/XMLSchema#decimal> .')
    graph = make_graph(lines)
    aug, _ = kl_rel_binning(height_group(graph), graph, REL, BinningSpec(bins=2), NEW)
    assert aug.fallback_statements == 1
    assert aug.delta_statements == 11
    assert any(t.object.value == NEW + "heightAnyValue" for t in aug.triples)
