"""Two-run comparison: pairing, ratios, bucket deltas."""
from __future__ import annotations

import pytest

import fixtures

from pacctkit.compare import MAGNITUDE_GAP, compare_reports
from pacctkit.reports import GeneralSummary, Histogram, HistogramSpec


def general(total: int, distinct: int) -> GeneralSummary:
    ratio = distinct / total if total else 0.0
    return GeneralSummary(total, distinct, None, None, 0.0, 0, ratio)


def hist(name: str, counts, edges=(0.0, 1.0, 2.0)) -> Histogram:
    return Histogram(HistogramSpec(name, edges, None), tuple(counts), sum(counts))


class TestPairing:
    def test_identical_runs(self):
        run = fixtures.run_five()
        c = compare_reports(run, run)
        assert c.total_commands_ratio == 1.0
        assert c.distinct_ratio_ratio == 1.0
        assert not c.order_of_magnitude_gap
        assert not c.only_in_a and not c.only_in_b
        assert len(c.paired) == 9
        for p in c.paired:
            if p.bucket_percent_deltas is not None:
                assert all(d == 0.0 for d in p.bucket_percent_deltas)

    def test_unpaired_reports_listed(self):
        a = {"general": general(10, 2), "extra-a": hist("x", [1, 1, 0])}
        b = {"general": general(20, 2), "extra-b": hist("y", [1, 1, 0])}
        c = compare_reports(a, b)
        assert c.only_in_a == ("extra-a",)
        assert c.only_in_b == ("extra-b",)
        assert [p.name for p in c.paired] == ["general"]

    def test_accepts_run_results_and_dicts(self):
        run = fixtures.run_five()
        assert compare_reports(run, dict(run.outputs)).total_commands_ratio == 1.0

    def test_labels_recorded(self):
        run = fixtures.run_five()
        c = compare_reports(run, run, label_a="one", label_b="two")
        assert (c.label_a, c.label_b) == ("one", "two")


class TestRatios:
    def test_second_run_in_numerator(self):
        c = compare_reports({"general": general(10, 5)}, {"general": general(20, 5)})
        assert c.total_commands_ratio == 2.0

    def test_published_scale_pair(self):
        # the workload pair the toolkit was sized around: 87,137-command
        # internet server vs 1,853,411-command cluster
        c = compare_reports(
            {"general": general(87_137, 174)},
            {"general": general(1_853_411, 741)},
        )
        assert c.total_commands_ratio == pytest.approx(21.27, abs=0.01)

    def test_distinct_ratio_gap_flagged(self):
        # distinct ratios 0.002 vs 0.0004: a fifth, flagged as roughly an
        # order of magnitude apart
        a = GeneralSummary(87_137, 174, None, None, 0.0, 0, 0.002)
        b = GeneralSummary(1_853_411, 741, None, None, 0.0, 0, 0.0004)
        c = compare_reports({"general": a}, {"general": b})
        assert c.distinct_ratio_ratio == pytest.approx(0.2)
        assert c.order_of_magnitude_gap

    def test_gap_symmetric(self):
        a = GeneralSummary(100, 50, None, None, 0.0, 0, 0.0004)
        b = GeneralSummary(100, 50, None, None, 0.0, 0, 0.002)
        assert compare_reports({"general": a}, {"general": b}).order_of_magnitude_gap

    def test_small_difference_not_flagged(self):
        a = GeneralSummary(100, 50, None, None, 0.0, 0, 0.5)
        b = GeneralSummary(100, 50, None, None, 0.0, 0, 0.3)
        c = compare_reports({"general": a}, {"general": b})
        assert not c.order_of_magnitude_gap
        assert MAGNITUDE_GAP > 0.5 / 0.3

    def test_missing_general_gives_no_ratios(self):
        c = compare_reports({"x": hist("x", [1, 0, 0])}, {"x": hist("x", [1, 0, 0])})
        assert c.total_commands_ratio is None
        assert c.distinct_ratio_ratio is None
        assert not c.order_of_magnitude_gap

    def test_zero_denominator_gives_none(self):
        c = compare_reports({"general": general(0, 0)}, {"general": general(5, 1)})
        assert c.total_commands_ratio is None


class TestBucketDeltas:
    def test_percent_point_arithmetic(self):
        a = hist("h", [1, 3, 0])
        b = hist("h", [3, 1, 0])
        (p,) = compare_reports({"h": a}, {"h": b}).paired
        assert p.bucket_percent_deltas == (50.0, -50.0, 0.0)

    def test_mismatched_edges_skip_deltas(self):
        a = hist("h", [1, 1, 0], edges=(0.0, 1.0, 2.0))
        b = hist("h", [1, 1, 0], edges=(0.0, 5.0, 9.0))
        (p,) = compare_reports({"h": a}, {"h": b}).paired
        assert p.bucket_percent_deltas is None

    def test_non_histogram_pairs_have_no_deltas(self):
        run = fixtures.run_five()
        c = compare_reports(run, run)
        by_name = {p.name: p for p in c.paired}
        assert by_name["general"].bucket_percent_deltas is None
        assert by_name["top20-total"].bucket_percent_deltas is None
        assert by_name["utime"].bucket_percent_deltas is not None

    def test_originals_kept_on_pair(self):
        a, b = hist("h", [1, 0, 0]), hist("h", [0, 1, 0])
        (p,) = compare_reports({"h": a}, {"h": b}).paired
        assert p.a is a and p.b is b
