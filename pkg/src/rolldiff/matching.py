"""Tolerance-based note matching between a reference and an estimate track.

A candidate hit pairs a reference and an estimate note whose onsets fall
within the onset tolerance (and optionally whose pitches match exactly and
whose offsets fall within an offset tolerance derived from the reference
note duration). A maximum-cardinality bipartite matching over the hit graph
then decides which notes count as matched; leftovers are missed (reference
side) or extra (estimate side).
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .smf import NoteEvent


@dataclass(frozen=True)
class MatchTolerance:
    """Knobs deciding when two notes may pair.

    The offset tolerance, when enabled, is max(offset_min_tol_sec,
    offset_ratio * reference note duration). All comparisons are inclusive.
    """

    onset_tol_sec: float = 0.05
    require_exact_pitch: bool = True
    offset_enabled: bool = False
    offset_ratio: float = 0.2
    offset_min_tol_sec: float = 0.05

    def __post_init__(self) -> None:
        if not self.onset_tol_sec > 0:
            raise ValueError(f"onset tolerance must be positive: {self.onset_tol_sec}")
        if self.offset_ratio < 0:
            raise ValueError(f"offset ratio must be >= 0: {self.offset_ratio}")
        if self.offset_min_tol_sec < 0:
            raise ValueError(
                f"offset minimum tolerance must be >= 0: {self.offset_min_tol_sec}"
            )


DEFAULT_TOLERANCE = MatchTolerance()


@dataclass(frozen=True)
class HitMatrix:
    """Candidate (reference, estimate) index pairs within tolerance."""

    ref_count: int
    est_count: int
    hits: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for ref_index, est_index in self.hits:
            if not (0 <= ref_index < self.ref_count and 0 <= est_index < self.est_count):
                raise ValueError(f"hit index out of range: ({ref_index}, {est_index})")


@dataclass(frozen=True)
class DiffReport:
    """Disjoint classification of both note lists under one tolerance."""

    pairs: tuple[tuple[int, int], ...]
    missed_ref: tuple[int, ...]
    extra_est: tuple[int, ...]
    tolerance: MatchTolerance

    @property
    def ref_count(self) -> int:
        return len(self.pairs) + len(self.missed_ref)

    @property
    def est_count(self) -> int:
        return len(self.pairs) + len(self.extra_est)


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    matched_count: int
    ref_count: int
    est_count: int


class HighlightMode(Enum):
    OFF = "off"
    EMPHASIZE_MATCHED = "matched"
    EMPHASIZE_DIFFERENCES = "differences"
    FULL = "full"


class HighlightClass(Enum):
    NEUTRAL = "neutral"
    MATCHED = "matched"
    MISSED = "missed"
    EXTRA = "extra"


def candidate_hits(
    ref_notes: Sequence[NoteEvent],
    est_notes: Sequence[NoteEvent],
    tolerance: MatchTolerance = DEFAULT_TOLERANCE,
) -> HitMatrix:
    """Every (ref, est) pair satisfying the tolerance, boundaries inclusive."""
    onset_order = sorted(range(len(est_notes)), key=lambda j: est_notes[j].onset_sec)
    onsets = [est_notes[j].onset_sec for j in onset_order]
    # Window pad keeps boundary-equal onsets inside the bisect prefilter;
    # the exact comparison below is authoritative.
    pad = tolerance.onset_tol_sec * 1e-9 + 1e-12

    hits: set[tuple[int, int]] = set()
    for ref_index, ref in enumerate(ref_notes):
        lo = bisect_left(onsets, ref.onset_sec - tolerance.onset_tol_sec - pad)
        hi = bisect_right(onsets, ref.onset_sec + tolerance.onset_tol_sec + pad)
        for position in range(lo, hi):
            est_index = onset_order[position]
            est = est_notes[est_index]
            if abs(ref.onset_sec - est.onset_sec) > tolerance.onset_tol_sec:
                continue
            if tolerance.require_exact_pitch and ref.pitch != est.pitch:
                continue
            if tolerance.offset_enabled:
                offset_tol = max(
                    tolerance.offset_min_tol_sec,
                    tolerance.offset_ratio * ref.duration_sec,
                )
                if abs(ref.offset_sec - est.offset_sec) > offset_tol:
                    continue
            hits.add((ref_index, est_index))
    return HitMatrix(ref_count=len(ref_notes), est_count=len(est_notes), hits=frozenset(hits))


def max_bipartite_match(hits: HitMatrix) -> list[tuple[int, int]]:
    """Maximum-cardinality matching over the hit graph via augmenting paths.

    Deterministic: reference indices are seeded in ascending order and
    estimate neighbors tried in ascending order, so ties always resolve
    the same way. Returned pairs are sorted by reference index.
    """
    adjacency: dict[int, list[int]] = {}
    for ref_index, est_index in sorted(hits.hits):
        adjacency.setdefault(ref_index, []).append(est_index)

    match_ref: dict[int, int] = {}
    match_est: dict[int, int] = {}
    for root in sorted(adjacency):
        _augment(root, adjacency, match_ref, match_est)
    return sorted(match_ref.items())


def _augment(root, adjacency, match_ref, match_est) -> bool:
    # Iterative alternating-path search; recursion depth would otherwise be
    # bounded only by the note count.
    seen: set[int] = set()
    stack: list[list] = [[root, iter(adjacency.get(root, ())), -1]]
    while stack:
        frame = stack[-1]
        descended = False
        for est_index in frame[1]:
            if est_index in seen:
                continue
            seen.add(est_index)
            frame[2] = est_index
            holder = match_est.get(est_index)
            if holder is None:
                # Free estimate note found: flip the whole alternating path.
                for ref_index, _, taken in stack:
                    match_est[taken] = ref_index
                    match_ref[ref_index] = taken
                return True
            stack.append([holder, iter(adjacency.get(holder, ())), -1])
            descended = True
            break
        if not descended:
            stack.pop()
    return False


def classify_diff(
    ref_notes: Sequence[NoteEvent],
    est_notes: Sequence[NoteEvent],
    tolerance: MatchTolerance = DEFAULT_TOLERANCE,
) -> DiffReport:
    """Match the two tracks and split every note into paired/missed/extra."""
    hits = candidate_hits(ref_notes, est_notes, tolerance)
    pairs = max_bipartite_match(hits)
    matched_ref = {r for r, _ in pairs}
    matched_est = {e for _, e in pairs}
    return DiffReport(
        pairs=tuple(pairs),
        missed_ref=tuple(i for i in range(len(ref_notes)) if i not in matched_ref),
        extra_est=tuple(j for j in range(len(est_notes)) if j not in matched_est),
        tolerance=tolerance,
    )


def compute_metrics(report: DiffReport) -> Metrics:
    """Precision/recall/F1 with the usual zero-denominator conventions."""
    matched = len(report.pairs)
    ref_count = report.ref_count
    est_count = report.est_count
    precision = matched / est_count if est_count else 0.0
    recall = matched / ref_count if ref_count else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        matched_count=matched,
        ref_count=ref_count,
        est_count=est_count,
    )


def highlight_assignment(
    doc,
    ref_layer_id: str,
    est_layer_id: str,
    report: DiffReport,
    mode: HighlightMode,
) -> dict[tuple[str, int], HighlightClass]:
    """Assign a highlight class to every note of the two compared layers.

    Keys are (layer id, note index within that layer). Notes of layers not
    involved in the comparison are absent and should render neutral.
    """
    ref_notes = _layer_notes(doc, ref_layer_id)
    est_notes = _layer_notes(doc, est_layer_id)
    if report.ref_count != len(ref_notes) or report.est_count != len(est_notes):
        raise ValueError("diff report does not match the layers' note counts")

    classes: dict[tuple[str, int], HighlightClass] = {}
    for index in range(len(ref_notes)):
        classes[(ref_layer_id, index)] = HighlightClass.NEUTRAL
    for index in range(len(est_notes)):
        classes[(est_layer_id, index)] = HighlightClass.NEUTRAL
    if mode is HighlightMode.OFF:
        return classes

    if mode in (HighlightMode.EMPHASIZE_MATCHED, HighlightMode.FULL):
        for ref_index, est_index in report.pairs:
            classes[(ref_layer_id, ref_index)] = HighlightClass.MATCHED
            classes[(est_layer_id, est_index)] = HighlightClass.MATCHED
    if mode in (HighlightMode.EMPHASIZE_DIFFERENCES, HighlightMode.FULL):
        for ref_index in report.missed_ref:
            classes[(ref_layer_id, ref_index)] = HighlightClass.MISSED
        for est_index in report.extra_est:
            classes[(est_layer_id, est_index)] = HighlightClass.EXTRA
    return classes


def _layer_notes(doc, layer_id: str):
    if layer_id not in {layer.id for layer in doc.layers}:
        raise ValueError(f"unknown layer id: {layer_id}")
    notes: Mapping[str, tuple] = doc.notes_by_layer
    return notes.get(layer_id, ())
