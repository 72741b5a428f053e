"""Numeric discretization into connected bin entities, with LOF pre-filtering.

Binning supports a fixed bin count or a percentage of unique values,
equal-width or equal-frequency boundaries, overlapping membership, and
hierarchical coarsenings. An optional 1-D local outlier factor pass discards
outliers before boundaries are computed; their statements are not dropped but
linked to dedicated low/high outlier entities so the statement count is
preserved.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .baselines import (
    Augmentation,
    DEFAULT_NAMESPACE,
    mint_any_value_triple,
    sanitize_value,
    subject_term,
)
from .graph import IndexedGraph, LiteralGroup
from .terms import IRI, Literal, Triple, local_name

log = logging.getLogger(__name__)

NEXT_BIN = "nextBin"
PARENT_BIN = "parentBin"


@dataclass(frozen=True)
class BinningSpec:
    """How to discretize one predicate's (sub)population of values.

    mode "fixed" uses *bins* directly; mode "percent" derives the bin count
    as a fraction of the number of unique values. *overlap* widens every bin
    by that fraction of its width on both sides, letting values fall into
    more than one bin. *hierarchy_depth* adds coarser levels that halve the
    bin count per level, children linked to parents.
    """

    mode: str = "fixed"
    bins: int = 10
    percent: float = 0.10
    overlap: float = 0.0
    hierarchy_depth: int = 0
    connect_adjacent: bool = True
    scheme: str = "equal-width"

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "percent"):
            raise ValueError(f"unknown binning mode: {self.mode!r}")
        if self.mode == "fixed" and self.bins < 1:
            raise ValueError("fixed mode needs bins >= 1")
        if self.mode == "percent" and not 0.0 < self.percent <= 1.0:
            raise ValueError("percent mode needs 0 < percent <= 1")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError("overlap must be in [0, 1)")
        if self.hierarchy_depth < 0:
            raise ValueError("hierarchy_depth must be >= 0")
        if self.scheme not in ("equal-width", "equal-frequency"):
            raise ValueError(f"unknown binning scheme: {self.scheme!r}")


@dataclass(frozen=True)
class LofSpec:
    k: int = 20
    threshold: float = 1.5

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("LOF needs k >= 1")
        if self.threshold <= 0:
            raise ValueError("LOF threshold must be positive")


def parse_numeric(literal: Literal) -> float:
    """Parse a numeric lexical form into binary64.

    Rejects non-finite values (INF/NaN) and anything outside the plain
    decimal/scientific grammar; callers route failures to the fallback
    strategy.
    """
    text = literal.lexical.strip()
    if not text or "_" in text:
        raise ValueError(f"not a numeric lexical form: {literal.lexical!r}")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite numeric value: {literal.lexical!r}")
    return value


def bin_count(occurrences: int, unique: int, spec: BinningSpec) -> int:
    """Target bin count: never more bins than unique values, never fewer than 1.

    Percent mode rounds half away from zero, so 10% of 200 unique values
    gives exactly 20 bins.
    """
    if unique < 1:
        raise ValueError("need at least one unique value")
    if spec.mode == "fixed":
        return min(spec.bins, unique)
    return max(1, min(unique, int(math.floor(spec.percent * unique + 0.5))))


@dataclass(frozen=True)
class BinLevel:
    """One granularity level: half-open bins over sorted boundaries."""

    boundaries: tuple[float, ...]
    entities: tuple[str, ...]

    @property
    def num_bins(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class BinLayout:
    """Computed boundaries and minted bin entities for one (sub)population.

    levels[0] is the finest level; each further level halves the bin count.
    Bins are inclusive-lower/exclusive-upper except the last, which is closed.
    """

    predicate: str
    subpopulation: int | None
    levels: tuple[BinLevel, ...]
    overlap: float
    connect_adjacent: bool

    @property
    def leaf(self) -> BinLevel:
        return self.levels[0]

    @property
    def lower(self) -> float:
        return self.leaf.boundaries[0]

    @property
    def upper(self) -> float:
        return self.leaf.boundaries[-1]


def _bin_label(pred_local: str, subpop: int | None, level: int, index: int, width: int) -> str:
    sub = f"Sub{subpop}" if subpop is not None else ""
    lvl = f"L{level}" if level > 0 else ""
    return f"{pred_local}{sub}{lvl}Bin{index:0{width}d}"


def _leaf_boundaries(values: np.ndarray, k: int, scheme: str) -> list[float]:
    lo = float(values.min())
    hi = float(values.max())
    if lo == hi:
        return [lo, hi]
    if scheme == "equal-width":
        inner = [lo + i * (hi - lo) / k for i in range(1, k)]
    else:
        qs = np.quantile(values, np.linspace(0.0, 1.0, k + 1)[1:-1])
        inner = [float(q) for q in qs]
    out = [lo]
    for b in inner:  # merge duplicate/degenerate boundaries
        if out[-1] < b < hi:
            out.append(b)
    out.append(hi)
    return out


def compute_bins(
    values: list[float] | np.ndarray,
    spec: BinningSpec,
    predicate: str = "value",
    namespace: str = DEFAULT_NAMESPACE,
    subpopulation: int | None = None,
) -> BinLayout:
    """Boundaries, entity names, and coarser levels for one value population.

    Identical values collapse to a single degenerate bin. Hierarchy levels
    stop early once a level reaches a single bin.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot bin an empty population")
    unique = len(np.unique(arr))
    k = bin_count(arr.size, unique, spec)
    pred_local = sanitize_value(local_name(predicate))
    boundaries = _leaf_boundaries(arr, k, spec.scheme)
    k = max(len(boundaries) - 1, 1)
    width = max(2, len(str(k - 1)))
    levels = [
        BinLevel(
            tuple(boundaries),
            tuple(
                namespace + _bin_label(pred_local, subpopulation, 0, i, width)
                for i in range(k)
            ),
        )
    ]
    prev = boundaries
    for depth in range(1, spec.hierarchy_depth + 1):
        if len(prev) - 1 <= 1:
            break
        coarse = prev[0:-1:2] + [prev[-1]]
        n_bins = max(len(coarse) - 1, 1)
        levels.append(
            BinLevel(
                tuple(coarse),
                tuple(
                    namespace + _bin_label(pred_local, subpopulation, depth, i, width)
                    for i in range(n_bins)
                ),
            )
        )
        prev = coarse
    return BinLayout(
        predicate=predicate,
        subpopulation=subpopulation,
        levels=tuple(levels),
        overlap=spec.overlap,
        connect_adjacent=spec.connect_adjacent,
    )


def _flat_index(value: float, boundaries: tuple[float, ...]) -> int:
    idx = bisect_right(boundaries, value) - 1
    return min(max(idx, 0), len(boundaries) - 2)


def _level_bins(value: float, level: BinLevel, overlap: float) -> list[int]:
    b = level.boundaries
    k = level.num_bins
    if k == 1:
        return [0]
    if overlap == 0.0:
        return [_flat_index(value, b)]
    hits = []
    for i in range(k):
        w = (b[i + 1] - b[i]) * overlap
        lo = b[i] - w
        hi = b[i + 1] + w
        if (lo <= value < hi) or (i == k - 1 and lo <= value <= hi):
            hits.append(i)
    if not hits:
        hits.append(_flat_index(value, b))
    return hits


def assign_bins(value: float, layout: BinLayout) -> tuple[tuple[int, int], ...]:
    """(level, bin index) pairs containing *value*, finest level first.

    Flat disjoint layouts yield exactly one pair; overlap and hierarchy can
    yield several. Out-of-range values clamp to the nearest boundary bin.
    """
    out: list[tuple[int, int]] = []
    for level_idx, level in enumerate(layout.levels):
        for bin_idx in _level_bins(value, level, layout.overlap):
            out.append((level_idx, bin_idx))
    return tuple(out)


@dataclass
class LofResult:
    """Per-value LOF scores with the retained/outlier partition.

    *scores* aligns with the input order. When the population is too small
    for the neighbor count, scoring is skipped and everything is retained.
    """

    scores: np.ndarray
    retained_indices: list[int]
    outlier_indices: list[int]
    skipped: bool = False

    @property
    def num_outliers(self) -> int:
        return len(self.outlier_indices)


def lof_scores(values: list[float] | np.ndarray, k: int = 20, threshold: float = 1.5) -> LofResult:
    """1-D local outlier factor: reachability distances, local reachability
    density, and the mean lrd ratio over the k-distance neighborhood.

    Ties are handled per the definition: the neighborhood holds every point
    within the k-distance, so it can exceed k members. Populations of
    duplicates have zero reachability; their lrd is infinite and their score
    is defined as 1.0. Scores can be infinite for points bordering such a
    duplicate cluster.
    """
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if n <= k:
        log.warning("LOF skipped: %d values <= k=%d, all retained", n, k)
        return LofResult(np.ones(n), list(range(n)), [], skipped=True)

    order = np.argsort(arr, kind="stable")
    sv = arr[order]

    # k-distance: tightest window of k+1 consecutive sorted values around
    # each point; in 1-D the k nearest neighbors are contiguous.
    idx = np.arange(n)
    kdist = np.full(n, np.inf)
    for off in range(k + 1):
        start = idx - k + off
        end = start + k
        valid = (start >= 0) & (end < n)
        cand = np.where(
            valid,
            np.maximum(sv - sv[np.clip(start, 0, n - 1)], sv[np.clip(end, 0, n - 1)] - sv),
            np.inf,
        )
        kdist = np.minimum(kdist, cand)

    # Neighborhood bounds: searchsorted on [v-kd, v+kd] is only a first
    # guess, because v-kd need not round to the neighbor value that defined
    # kd. The fixup compares distances with the same subtraction that
    # produced kdist, so the boundary neighbor is never lost.
    lo = np.searchsorted(sv, sv - kdist, side="left")
    hi = np.searchsorted(sv, sv + kdist, side="right")
    for i in range(n):
        while lo[i] > 0 and sv[i] - sv[lo[i] - 1] <= kdist[i]:
            lo[i] -= 1
        while lo[i] < i and sv[i] - sv[lo[i]] > kdist[i]:
            lo[i] += 1
        while hi[i] < n and sv[hi[i]] - sv[i] <= kdist[i]:
            hi[i] += 1
        while hi[i] - 1 > i and sv[hi[i] - 1] - sv[i] > kdist[i]:
            hi[i] -= 1

    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(kdist[lo[i] : hi[i]], np.abs(sv[lo[i] : hi[i]] - sv[i]))
        total = reach.sum() - kdist[i]  # drop self (reach to self is own k-distance)
        count = hi[i] - lo[i] - 1
        mean_reach = total / count
        lrd[i] = np.inf if mean_reach <= 0.0 else 1.0 / mean_reach

    scores_sorted = np.empty(n)
    for i in range(n):
        if np.isinf(lrd[i]):
            scores_sorted[i] = 1.0
            continue
        total = lrd[lo[i] : hi[i]].sum() - lrd[i]
        count = hi[i] - lo[i] - 1
        scores_sorted[i] = (total / count) / lrd[i]

    scores = np.empty(n)
    scores[order] = scores_sorted
    retained = [i for i in range(n) if scores[i] <= threshold]
    outliers = [i for i in range(n) if scores[i] > threshold]
    return LofResult(scores, retained, outliers)


def emit_bin_triples(
    group: LiteralGroup,
    graph: IndexedGraph,
    layout: BinLayout,
    assignments: list[tuple[int, tuple[tuple[int, int], ...]]],
    namespace: str = DEFAULT_NAMESPACE,
    aug: Augmentation | None = None,
) -> Augmentation:
    """Statement triples for assigned bins plus the structural bin graph.

    *assignments* pairs each subject id with its assign_bins result. All bins
    of the layout are minted (the adjacency chain runs through empty bins);
    chain and hierarchy triples are structural, not statement, triples.
    """
    aug = aug if aug is not None else Augmentation()
    predicate = IRI(group.predicate)
    for level in layout.levels:
        for entity in level.entities:
            aug.add_entity(entity)
    for subject_id, assigned in assignments:
        subj = subject_term(graph, subject_id)
        for level_idx, bin_idx in assigned:
            aug.triples.append(
                Triple(subj, predicate, IRI(layout.levels[level_idx].entities[bin_idx]))
            )
            aug.weights.append(None)
    if layout.connect_adjacent and any(level.num_bins > 1 for level in layout.levels):
        next_bin = namespace + NEXT_BIN
        if next_bin not in aug.relations:
            aug.relations.append(next_bin)
        for level in layout.levels:
            for i in range(level.num_bins - 1):
                aug.structural_triples.append(
                    Triple(IRI(level.entities[i]), IRI(next_bin), IRI(level.entities[i + 1]))
                )
    if len(layout.levels) > 1:
        parent_bin = namespace + PARENT_BIN
        if parent_bin not in aug.relations:
            aug.relations.append(parent_bin)
        for child_level, parent_level in zip(layout.levels, layout.levels[1:]):
            for i in range(child_level.num_bins):
                parent_idx = min(i // 2, parent_level.num_bins - 1)
                aug.structural_triples.append(
                    Triple(
                        IRI(child_level.entities[i]),
                        IRI(parent_bin),
                        IRI(parent_level.entities[parent_idx]),
                    )
                )
    return aug


def bin_statements(
    group: LiteralGroup,
    graph: IndexedGraph,
    spec: BinningSpec,
    namespace: str = DEFAULT_NAMESPACE,
    lof: LofSpec | None = None,
    statements: list[tuple[int, float]] | None = None,
    subpopulation: int | None = None,
    aug: Augmentation | None = None,
) -> Augmentation:
    """Bin pre-parsed (subject, value) statements of one (sub)population.

    With LOF enabled, boundaries are computed from retained values only;
    outlier statements link to OutlierLow/OutlierHigh entities instead of a
    bin, so every statement still yields exactly one output statement.
    """
    aug = aug if aug is not None else Augmentation()
    if statements is None:
        statements = [
            (subject_id, parse_numeric(obj))  # type: ignore[arg-type]
            for subject_id, obj in group.statements
        ]
    if not statements:
        return aug
    outlier_stmts: list[tuple[int, float]] = []
    retained_stmts = statements
    if lof is not None:
        result = lof_scores([v for _, v in statements], lof.k, lof.threshold)
        if result.num_outliers:
            outlier_set = set(result.outlier_indices)
            retained_stmts = [s for i, s in enumerate(statements) if i not in outlier_set]
            outlier_stmts = [s for i, s in enumerate(statements) if i in outlier_set]
            if not retained_stmts:  # everything flagged: skip the filter
                aug.warnings.append(
                    f"{group.predicate}: LOF flagged all {len(statements)} values, filter skipped"
                )
                retained_stmts, outlier_stmts = statements, []
    layout = compute_bins(
        [v for _, v in retained_stmts],
        spec,
        predicate=group.predicate,
        namespace=namespace,
        subpopulation=subpopulation,
    )
    assignments = [(sid, assign_bins(v, layout)) for sid, v in retained_stmts]
    emit_bin_triples(group, graph, layout, assignments, namespace, aug)
    if outlier_stmts:
        pred_local = sanitize_value(local_name(group.predicate))
        sub = f"Sub{subpopulation}" if subpopulation is not None else ""
        low = IRI(namespace + pred_local + sub + "OutlierLow")
        high = IRI(namespace + pred_local + sub + "OutlierHigh")
        mid = (layout.lower + layout.upper) / 2.0
        predicate = IRI(group.predicate)
        for subject_id, value in outlier_stmts:
            entity = low if value <= mid else high
            aug.add_entity(entity.value)
            aug.triples.append(Triple(subject_term(graph, subject_id), predicate, entity))
            aug.weights.append(None)
    return aug


def nbins(
    group: LiteralGroup,
    graph: IndexedGraph,
    spec: BinningSpec,
    namespace: str = DEFAULT_NAMESPACE,
    lof: LofSpec | None = None,
) -> Augmentation:
    """The plain n-bin strategy over a whole numeric group.

    Unparseable lexical forms fall back to a one-entity link and are counted.
    """
    aug = Augmentation()
    parsed: list[tuple[int, float]] = []
    fallback: list[int] = []
    for subject_id, obj in group.statements:
        try:
            parsed.append((subject_id, parse_numeric(obj)))  # type: ignore[arg-type]
        except (ValueError, AttributeError):
            fallback.append(subject_id)
    if parsed:
        bin_statements(group, graph, spec, namespace, lof, statements=parsed, aug=aug)
    for subject_id in fallback:
        mint_any_value_triple(graph, group, subject_id, namespace, aug)
    if fallback:
        aug.fallback_statements = len(fallback)
        aug.warnings.append(
            f"{group.predicate}: {len(fallback)} unparseable numeric statements got AnyValue links"
        )
    return aug
