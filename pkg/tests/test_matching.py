from __future__ import annotations

import itertools
import random
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rolldiff.matching import (
    DiffReport,
    HighlightClass,
    HighlightMode,
    HitMatrix,
    MatchTolerance,
    candidate_hits,
    classify_diff,
    compute_metrics,
    highlight_assignment,
    max_bipartite_match,
)
from rolldiff.model import Manifest, ManifestEntry, MidiSource, build_document
from rolldiff.smf import NoteEvent


def note(pitch, onset, offset, velocity=64):
    return NoteEvent(pitch=pitch, onset_sec=onset, offset_sec=offset, velocity=velocity)


# Matching fixture shared with the CLI and render tests: a reference of
# three notes against an estimate of four, where one estimate onset is
# 0.20 s late and one extra pitch appears.
REF_NOTES = [note(60, 0.00, 0.50), note(60, 1.00, 1.50), note(64, 2.00, 2.40)]
EST_NOTES = [
    note(60, 0.03, 0.55),
    note(60, 1.20, 1.60),
    note(64, 2.01, 2.38),
    note(67, 3.00, 3.20),
]


def brute_force_max_cardinality(hits: HitMatrix) -> int:
    """Exhaustive oracle: recurse over reference indices, memoized on the
    set of used estimate indices. Independent of the augmenting-path code."""
    adjacency = [0] * hits.ref_count
    for r, e in hits.hits:
        adjacency[r] |= 1 << e

    @lru_cache(maxsize=None)
    def best(index: int, used_mask: int) -> int:
        if index == hits.ref_count:
            return 0
        top = best(index + 1, used_mask)  # leave this reference unmatched
        options = adjacency[index] & ~used_mask
        while options:
            bit = options & -options
            options ^= bit
            top = max(top, 1 + best(index + 1, used_mask | bit))
        return top

    result = best(0, 0)
    best.cache_clear()
    return result


def enumerate_max_cardinality(hits: HitMatrix) -> int:
    """Second, even dumber oracle for tiny instances: try every injective
    assignment of reference indices to estimate indices."""
    best = 0
    indices = range(hits.est_count)
    for chosen_refs in itertools.chain.from_iterable(
        itertools.combinations(range(hits.ref_count), k)
        for k in range(min(hits.ref_count, hits.est_count), -1, -1)
    ):
        for perm in itertools.permutations(indices, len(chosen_refs)):
            if all((r, e) in hits.hits for r, e in zip(chosen_refs, perm)):
                best = max(best, len(chosen_refs))
                break
        if best == min(hits.ref_count, hits.est_count):
            break
    return best


def random_instance(rng: random.Random):
    ref = [
        note(rng.randrange(50, 70), on := rng.uniform(0, 4), on + rng.uniform(0.05, 1.0))
        for _ in range(rng.randrange(0, 11))
    ]
    est = [
        note(rng.randrange(50, 70), on := rng.uniform(0, 4), on + rng.uniform(0.05, 1.0))
        for _ in range(rng.randrange(0, 11))
    ]
    tolerance = MatchTolerance(
        onset_tol_sec=rng.choice([0.01, 0.05, 0.2, 0.6]),
        offset_enabled=rng.random() < 0.5,
        offset_ratio=rng.choice([0.0, 0.2, 0.5]),
        offset_min_tol_sec=rng.choice([0.0, 0.05, 0.3]),
    )
    return ref, est, tolerance


class TestCandidateHits:
    def test_default_hit(self):
        hits = candidate_hits([note(60, 0.00, 0.50)], [note(60, 0.03, 0.55)])
        assert hits.hits == {(0, 0)}

    def test_pitch_mismatch(self):
        hits = candidate_hits([note(60, 0.0, 0.5)], [note(61, 0.0, 0.5)])
        assert hits.hits == frozenset()

    def test_pitch_ignored_when_not_required(self):
        tol = MatchTolerance(require_exact_pitch=False)
        hits = candidate_hits([note(60, 0.0, 0.5)], [note(61, 0.0, 0.5)], tol)
        assert hits.hits == {(0, 0)}

    def test_offset_tolerance_formula(self):
        # offset tol = max(0.05, 0.2 * 0.50) = 0.10 >= |0.55 - 0.50|
        tol = MatchTolerance(offset_enabled=True)
        hits = candidate_hits([note(60, 0.00, 0.50)], [note(60, 0.03, 0.55)], tol)
        assert hits.hits == {(0, 0)}

    def test_offset_outside_tolerance(self):
        tol = MatchTolerance(offset_enabled=True)
        hits = candidate_hits([note(60, 0.00, 0.50)], [note(60, 0.03, 0.75)], tol)
        assert hits.hits == frozenset()

    def test_boundary_inclusive(self):
        est_onset = 0.0 + 0.05
        hits = candidate_hits([note(60, 0.0, 0.5)], [note(60, est_onset, 0.55)])
        assert hits.hits == {(0, 0)}

    def test_counts_recorded(self):
        hits = candidate_hits(REF_NOTES, EST_NOTES)
        assert hits.ref_count == 3
        assert hits.est_count == 4
        assert hits.hits == {(0, 0), (2, 2)}


class TestMaxBipartiteMatch:
    def test_single_hit(self):
        assert max_bipartite_match(HitMatrix(1, 1, frozenset({(0, 0)}))) == [(0, 0)]

    def test_empty(self):
        assert max_bipartite_match(HitMatrix(0, 0, frozenset())) == []

    def test_augmenting_path_required(self):
        # Greedy that takes (0, 0) first reaches only one pair; the maximum
        # re-routes reference 0 to estimate 1.
        hits = HitMatrix(2, 2, frozenset({(0, 0), (0, 1), (1, 0)}))
        assert max_bipartite_match(hits) == [(0, 1), (1, 0)]

    def test_deterministic_ties_by_lowest_index(self):
        # Reference 1 tries estimate 0 first (lowest index), displacing
        # reference 0 onto estimate 1; repeated runs always agree.
        hits = HitMatrix(2, 2, frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}))
        first = max_bipartite_match(hits)
        assert first == [(0, 1), (1, 0)]
        assert first == max_bipartite_match(hits)

    def test_oracles_agree_on_small_instances(self):
        rng = random.Random(7)
        for _ in range(60):
            ref_count = rng.randrange(0, 5)
            est_count = rng.randrange(0, 5)
            pairs = frozenset(
                (r, e)
                for r in range(ref_count)
                for e in range(est_count)
                if rng.random() < 0.4
            )
            hits = HitMatrix(ref_count, est_count, pairs)
            assert brute_force_max_cardinality(hits) == enumerate_max_cardinality(hits)

    def test_cardinality_matches_oracle(self):
        rng = random.Random(99)
        for _ in range(120):
            ref, est, tol = random_instance(rng)
            hits = candidate_hits(ref, est, tol)
            pairs = max_bipartite_match(hits)
            assert set(pairs) <= hits.hits
            assert len({r for r, _ in pairs}) == len(pairs)
            assert len({e for _, e in pairs}) == len(pairs)
            assert len(pairs) == brute_force_max_cardinality(hits)


class TestClassifyDiff:
    def test_reference_fixture(self):
        report = classify_diff(REF_NOTES, EST_NOTES)
        assert report.pairs == ((0, 0), (2, 2))
        assert report.missed_ref == (1,)
        assert report.extra_est == (1, 3)

    def test_identical_tracks(self):
        report = classify_diff(REF_NOTES, REF_NOTES)
        assert report.pairs == ((0, 0), (1, 1), (2, 2))
        assert report.missed_ref == ()
        assert report.extra_est == ()

    def test_empty_estimate(self):
        report = classify_diff(REF_NOTES, [])
        assert report.pairs == ()
        assert report.missed_ref == (0, 1, 2)
        assert report.extra_est == ()

    def test_partition_invariants(self):
        rng = random.Random(1234)
        for _ in range(100):
            ref, est, tol = random_instance(rng)
            report = classify_diff(ref, est, tol)
            matched_ref = [r for r, _ in report.pairs]
            matched_est = [e for _, e in report.pairs]
            assert sorted(matched_ref + list(report.missed_ref)) == list(range(len(ref)))
            assert sorted(matched_est + list(report.extra_est)) == list(range(len(est)))


class TestMetrics:
    def test_reference_fixture_metrics(self):
        metrics = compute_metrics(classify_diff(REF_NOTES, EST_NOTES))
        assert metrics.precision == pytest.approx(0.5, abs=1e-4)
        assert metrics.recall == pytest.approx(0.6667, abs=1e-4)
        assert metrics.f1 == pytest.approx(0.5714, abs=1e-4)

    def test_identical_tracks_are_perfect(self):
        metrics = compute_metrics(classify_diff(REF_NOTES, REF_NOTES))
        assert metrics.precision == 1.0
        assert metrics.recall == 1.0
        assert metrics.f1 == 1.0

    def test_empty_estimate_zero_conventions(self):
        metrics = compute_metrics(classify_diff(REF_NOTES, []))
        assert (metrics.precision, metrics.recall, metrics.f1) == (0.0, 0.0, 0.0)

    def test_bounds_and_perfection_condition(self):
        rng = random.Random(555)
        for _ in range(100):
            ref, est, tol = random_instance(rng)
            report = classify_diff(ref, est, tol)
            metrics = compute_metrics(report)
            assert 0.0 <= metrics.precision <= 1.0
            assert 0.0 <= metrics.recall <= 1.0
            assert 0.0 <= metrics.f1 <= max(metrics.precision, metrics.recall)
            perfect = metrics.precision == metrics.recall == metrics.f1 == 1.0
            if ref or est:
                assert perfect == (not report.missed_ref and not report.extra_est)


class TestProperties:
    @given(st.data())
    def test_monotone_in_onset_tolerance(self, data):
        rng = random.Random(data.draw(st.integers(0, 10_000)))
        ref, est, _ = random_instance(rng)
        small = data.draw(st.floats(min_value=0.001, max_value=0.5))
        grow = data.draw(st.floats(min_value=0.0, max_value=0.5))
        loose = MatchTolerance(onset_tol_sec=small + grow)
        tight = MatchTolerance(onset_tol_sec=small)
        assert len(classify_diff(ref, est, loose).pairs) >= len(
            classify_diff(ref, est, tight).pairs
        )

    @given(st.integers(0, 10_000))
    def test_cardinality_symmetric_without_offsets(self, seed):
        rng = random.Random(seed)
        ref, est, _ = random_instance(rng)
        tol = MatchTolerance(onset_tol_sec=0.1)
        forward = classify_diff(ref, est, tol)
        backward = classify_diff(est, ref, tol)
        assert len(forward.pairs) == len(backward.pairs)


def _two_layer_document():
    manifest = Manifest(
        entries=(
            ManifestEntry(path="a.mid", name="Reference", type="midi"),
            ManifestEntry(path="b.mid", name="Estimate", type="midi"),
        )
    )
    sources = [MidiSource(notes=tuple(REF_NOTES)), MidiSource(notes=tuple(EST_NOTES))]
    return build_document(manifest, sources)


class TestHighlightAssignment:
    def test_differences_mode(self):
        doc = _two_layer_document()
        report = classify_diff(REF_NOTES, EST_NOTES)
        classes = highlight_assignment(
            doc, "reference", "estimate", report, HighlightMode.EMPHASIZE_DIFFERENCES
        )
        assert classes[("reference", 1)] is HighlightClass.MISSED
        assert classes[("estimate", 1)] is HighlightClass.EXTRA
        assert classes[("estimate", 3)] is HighlightClass.EXTRA
        assert classes[("reference", 0)] is HighlightClass.NEUTRAL
        assert classes[("estimate", 0)] is HighlightClass.NEUTRAL

    def test_off_mode_all_neutral(self):
        doc = _two_layer_document()
        report = classify_diff(REF_NOTES, EST_NOTES)
        classes = highlight_assignment(doc, "reference", "estimate", report, HighlightMode.OFF)
        assert set(classes.values()) == {HighlightClass.NEUTRAL}

    def test_identical_tracks_full_mode_all_matched(self):
        manifest = Manifest(
            entries=(
                ManifestEntry(path="a.mid", name="A", type="midi"),
                ManifestEntry(path="b.mid", name="B", type="midi"),
            )
        )
        sources = [MidiSource(notes=tuple(REF_NOTES)), MidiSource(notes=tuple(REF_NOTES))]
        doc = build_document(manifest, sources)
        report = classify_diff(REF_NOTES, REF_NOTES)
        classes = highlight_assignment(doc, "a", "b", report, HighlightMode.FULL)
        assert set(classes.values()) == {HighlightClass.MATCHED}

    def test_unknown_layer_rejected(self):
        doc = _two_layer_document()
        report = classify_diff(REF_NOTES, EST_NOTES)
        with pytest.raises(ValueError):
            highlight_assignment(doc, "reference", "nope", report, HighlightMode.FULL)
