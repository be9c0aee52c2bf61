import io

import numpy as np
import pytest

from gmem import BitPattern, BottomRight, MemoryNet, apply_mask, make_pattern, random_pattern
from gmem import evalbench
from gmem.evalbench import ExperimentReport, run_full_recall, run_occlusion_sweep, run_unknown_probe, write_csv
from gmem.patterns import PatternSet

from conftest import overlap_winner


def _net(patterns):
    net = MemoryNet(patterns.width, patterns.height)
    net.store_all(patterns)
    return net


def _distinct_set(rng, n, w, h):
    seen, out = set(), []
    while len(out) < n:
        p = BitPattern(w, h, (rng.random(w * h) < 0.5).astype(np.uint8))
        if p not in seen:
            seen.add(p)
            out.append(p)
    return PatternSet(out)


class TestFullRecall:
    def test_perfect_on_distinct_small_corpora(self, rng):
        # distinct patterns never lose: cross overlap < own ones unless one covers the other,
        # so the brute-force oracle decides what "correct" must be
        for _ in range(100):
            w, h = int(rng.integers(2, 9)), int(rng.integers(2, 9))
            ps = _distinct_set(rng, int(rng.integers(1, 17)), w, h)
            report = run_full_recall(_net(ps), ps)
            stored = [p.bits.tolist() for p in ps]
            for o in report.per_pattern:
                assert o.winner == overlap_winner(stored, stored[o.pattern], [True] * (w * h))

    def test_perfect_without_nested_supports(self):
        ps = PatternSet([make_pattern(2, 2, b) for b in ([1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1])])
        report = run_full_recall(_net(ps), ps)
        assert report.accuracy == 1.0
        assert report.max_score == report.min_score == 0.75

    def test_duplicates_resolve_low(self):
        p = make_pattern(2, 2, [1, 0, 1, 0])
        ps = PatternSet([p, make_pattern(2, 2, [0, 1, 0, 1]), p])
        report = run_full_recall(_net(ps), ps)
        assert [o.winner for o in report.per_pattern] == [0, 1, 0]
        assert [o.correct for o in report.per_pattern] == [True, True, False]
        assert report.accuracy == pytest.approx(2 / 3)

    def test_disjoint_supports(self):
        ps = PatternSet([make_pattern(3, 1, b) for b in ([1, 0, 0], [0, 1, 0], [0, 0, 1])])
        net = _net(ps)
        for i, p in enumerate(ps):
            scores = net.recall(p).scores
            assert [s for j, s in enumerate(scores) if j != i] == [0.0, 0.0]

    def test_matches_direct_recall(self, qr_net, qr_corpus):
        report = run_full_recall(qr_net, qr_corpus)
        for o in report.per_pattern[::29]:
            r = qr_net.recall(qr_corpus[o.pattern])
            assert (o.winner, o.score, o.accepted) == (r.winner, r.winner_score, r.accepted)

    def test_mismatch(self, three_net):
        ps = PatternSet([make_pattern(2, 2, [1, 0, 1, 0])])
        with pytest.raises(ValueError):
            run_full_recall(three_net, ps)


class TestOcclusionSweep:
    def test_unit_fraction_is_full_recall(self, qr_net, qr_corpus):
        full = io.StringIO()
        write_csv(run_full_recall(qr_net, qr_corpus), full)
        sweep = run_occlusion_sweep(qr_net, qr_corpus, [1.0])
        one = io.StringIO()
        write_csv(sweep.by_fraction[1.0], one)
        assert one.getvalue() == full.getvalue()

    def test_quarter_against_oracle(self, qr_net, qr_corpus):
        report = run_occlusion_sweep(qr_net, qr_corpus, [0.25])
        assert report.accuracy_at(0.25) == 1.0
        stored = [p.bits.tolist() for p in qr_corpus]
        for o in report.per_pattern[::23]:
            m = apply_mask(qr_corpus[o.pattern], BottomRight(0.25))
            assert o.winner == overlap_winner(stored, stored[o.pattern], m.presented.tolist())

    def test_failure_fraction_and_order(self):
        # both patterns light the bottom-right cell, so at keep 0.25 pattern 1 ties with 0 and loses
        ps = PatternSet([make_pattern(2, 2, [0, 1, 0, 1]), make_pattern(2, 2, [1, 0, 1, 1])])
        report = run_occlusion_sweep(_net(ps), ps, [1.0, 0.25])
        assert report.accuracy_at(1.0) == 1.0
        assert report.accuracy_at(0.25) == 0.5
        assert report.failure_fraction == 0.25
        assert [o.keep for o in report.per_pattern] == [1.0, 1.0, 0.25, 0.25]
        assert report.monotone_violations == []

    def test_monotone_violation_reported(self):
        # nested corner regions cannot shrink into higher accuracy, so use disjoint cells
        from gmem import Rect

        regions = {1.0: Rect(0, 0, 2, 1), 0.5: Rect(0, 0, 1, 1), 0.25: Rect(1, 0, 1, 1)}
        ps = PatternSet([make_pattern(2, 1, [1, 0]), make_pattern(2, 1, [1, 1])])
        report = run_occlusion_sweep(_net(ps), ps, [1.0, 0.5, 0.25], region=regions.__getitem__)
        assert [report.accuracy_at(f) for f in (1.0, 0.5, 0.25)] == [1.0, 0.5, 1.0]
        assert report.monotone_violations == [0.25]
        assert report.failure_fraction == 0.5

    def test_empty_fractions(self, three_net):
        ps = PatternSet([make_pattern(2, 2, b) for b in ([1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 1])])
        with pytest.raises(ValueError):
            run_occlusion_sweep(three_net, ps, [])
        with pytest.raises(ValueError):
            run_occlusion_sweep(three_net, ps, [0.0])


class TestUnknownProbe:
    def test_random_unknowns_near_expectation(self, qr_net, qr_corpus):
        maxima = []
        for seed in range(1000, 1100):
            report = run_unknown_probe(qr_net, qr_corpus, random_pattern(116, 116, 0.5, seed))
            assert not report.per_pattern[0].accepted
            maxima.append(report.max_score)
        assert abs(np.mean(maxima) - 0.375) <= 0.05

    def test_stored_pattern_rejected_as_input(self, qr_net, qr_corpus):
        with pytest.raises(ValueError, match="stored"):
            run_unknown_probe(qr_net, qr_corpus, qr_corpus[145])

    def test_all_zeros(self, qr_net, qr_corpus):
        report = run_unknown_probe(qr_net, qr_corpus, BitPattern(116, 116, np.zeros(13456, dtype=np.uint8)))
        assert not report.scores.any()
        assert report.per_pattern[0].correct and not report.per_pattern[0].accepted

    def test_dims(self, qr_net, qr_corpus):
        with pytest.raises(ValueError):
            run_unknown_probe(qr_net, qr_corpus, make_pattern(2, 2, [1, 0, 0, 0]))


class TestCSV:
    def test_empty(self):
        sink = io.StringIO()
        write_csv(ExperimentReport("full_recall", [], 0.0, None, None), sink)
        assert sink.getvalue() == "pattern,winner,score,accepted,correct\n"

    def test_three_rows(self):
        ps = PatternSet([make_pattern(2, 2, b) for b in ([1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 1])])
        sink = io.StringIO()
        write_csv(run_full_recall(_net(ps), ps), sink)
        lines = sink.getvalue().splitlines()
        rows = [l for l in lines[1:] if not l.startswith("#")]
        assert rows == ["0,0,0.750000,1,1", "1,1,0.750000,1,1", "2,2,1.125000,1,1"]
        assert "# accuracy=1.000000" in lines

    def test_six_decimals(self):
        from gmem.evalbench import ProbeOutcome

        report = ExperimentReport("full_recall", [ProbeOutcome(145, 145, 0.7479187, True, True)], 1.0, 0.7479187, 0.7479187)
        sink = io.StringIO()
        write_csv(report, sink)
        assert sink.getvalue().splitlines()[1] == "145,145,0.747919,1,1"

    def test_sweep_lines(self):
        ps = PatternSet([make_pattern(2, 2, [0, 1, 0, 1]), make_pattern(2, 2, [1, 0, 1, 1])])
        sink = io.StringIO()
        write_csv(run_occlusion_sweep(_net(ps), ps, [1.0, 0.25]), sink)
        text = sink.getvalue()
        assert text.startswith("pattern,winner,score,accepted,correct,keep\n")
        assert "# keep=0.250000 accuracy=0.500000" in text
        assert "# failure_fraction=0.250000" in text

    def test_report_name(self):
        import datetime

        name = evalbench.default_report_name("sweep", datetime.datetime(2025, 1, 2, 3, 4, 5))
        assert name == "sweep_20250102T030405.csv"
