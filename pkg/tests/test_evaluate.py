import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birs.errors import NoTruth
from birs.evaluate import (
    aggregate_replicates,
    detection_rate,
    fdr_at_distance,
    jaccard,
    true_positive_rate,
)
from birs.regions import Region
from birs.simulate import TruthSet

GRID = 100  # bp between adjacent variants in these tests


def truth_with(windows):
    p = max(w.end for w in windows) + 10 if windows else 10
    return TruthSet(
        causal_windows=list(windows),
        causal_indices=np.empty(0, dtype=np.int64),
        beta=np.zeros(p),
    )


def grid_positions(p):
    return np.arange(p) * GRID


FOUR_WINDOWS = [Region(10, 20), Region(40, 50), Region(70, 80), Region(100, 110)]


class TestDetectionRate:
    def test_exact_recovery(self):
        truth = truth_with(FOUR_WINDOWS)
        assert detection_rate(truth, list(FOUR_WINDOWS)) == 1.0

    def test_empty_detection(self):
        assert detection_rate(truth_with(FOUR_WINDOWS), []) == 0.0

    def test_three_of_four(self):
        truth = truth_with(FOUR_WINDOWS)
        detected = [Region(12, 14), Region(45, 55), Region(100, 101)]
        assert detection_rate(truth, detected) == 0.75

    def test_no_truth_raises(self):
        with pytest.raises(NoTruth):
            detection_rate(truth_with([]), [Region(0, 5)])


class TestTruePositiveRate:
    def test_superset_detection(self):
        truth = truth_with(FOUR_WINDOWS)
        assert true_positive_rate(truth, [Region(0, 120)]) == 1.0

    def test_half_of_each_window(self):
        truth = truth_with(FOUR_WINDOWS)
        detected = [Region(w.start, w.start + 5) for w in FOUR_WINDOWS]
        assert true_positive_rate(truth, detected) == 0.5

    def test_disjoint_detection(self):
        truth = truth_with(FOUR_WINDOWS)
        assert true_positive_rate(truth, [Region(25, 30)]) == 0.0

    def test_no_truth_raises(self):
        with pytest.raises(NoTruth):
            true_positive_rate(truth_with([]), [])


class TestFdrAtDistance:
    def test_detected_inside_truth_is_zero(self):
        truth = truth_with(FOUR_WINDOWS)
        pos = grid_positions(200)
        for h in (25, 50, 75):
            assert fdr_at_distance(truth, [Region(12, 18)], h, pos) == 0.0

    def test_far_detections_are_all_false(self):
        truth = truth_with([Region(0, 10)])
        pos = grid_positions(3_000)
        detected = [Region(2_000, 2_010)]  # >= 199 kb away
        assert fdr_at_distance(truth, detected, 75, pos) == 1.0

    def test_half_at_60kb(self):
        # Half the detected variants inside truth, half exactly 60 kb out.
        truth = truth_with([Region(0, 10)])
        pos = grid_positions(3_000)
        inside = Region(0, 10)
        outside = Region(609, 619)  # starts 60 kb past position of index 9
        detected = [inside, outside]
        assert fdr_at_distance(truth, detected, 50, pos) == 0.5
        assert fdr_at_distance(truth, detected, 75, pos) == 0.0

    def test_empty_detection_is_zero(self):
        truth = truth_with(FOUR_WINDOWS)
        assert fdr_at_distance(truth, [], 25, grid_positions(200)) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_monotone_non_increasing_in_h(self, seed):
        rng = np.random.default_rng(seed)
        p = 500
        pos = grid_positions(p)
        truth = truth_with([Region(50, 80), Region(300, 330)])
        detected = []
        for _ in range(int(rng.integers(1, 5))):
            start = int(rng.integers(0, p - 10))
            detected.append(Region(start, start + int(rng.integers(1, 10))))
        vals = [fdr_at_distance(truth, detected, h, pos) for h in (25, 50, 75)]
        assert vals[0] >= vals[1] >= vals[2]


class TestJaccard:
    def test_identical(self):
        assert jaccard([Region(3, 9)], [Region(3, 9)]) == 1.0

    def test_disjoint(self):
        assert jaccard([Region(0, 5)], [Region(5, 10)]) == 0.0

    def test_overlap(self):
        assert jaccard([Region(0, 10)], [Region(5, 15)]) == pytest.approx(5 / 15)

    def test_both_empty_is_one(self):
        assert jaccard([], []) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_symmetry_and_size_bound(self, seed):
        rng = np.random.default_rng(seed)

        def random_regions():
            out = []
            for _ in range(int(rng.integers(0, 4))):
                start = int(rng.integers(0, 90))
                out.append(Region(start, start + int(rng.integers(1, 12))))
            return out

        a, b = random_regions(), random_regions()
        assert jaccard(a, b) == jaccard(b, a)
        assert jaccard(a, a) == 1.0
        from birs.regions import total_length

        la, lb = total_length(a), total_length(b)
        if la and lb:
            assert jaccard(a, b) <= min(la, lb) / max(la, lb) + 1e-12


class TestAggregate:
    def test_single_replicate_has_zero_sd(self):
        truth = truth_with(FOUR_WINDOWS)
        report = aggregate_replicates(
            [[Region(12, 18)]], [truth], grid_positions(200)
        )
        assert report.sd_dr == 0.0 and report.sd_tpr == 0.0
        assert all(v == 0.0 for v in report.sd_fdr_h.values())
        assert report.n_replicates == 1

    def test_two_replicate_arithmetic(self):
        truth = truth_with([Region(0, 10), Region(50, 60)])
        full = [Region(0, 10), Region(50, 60)]
        half = [Region(0, 10)]
        report = aggregate_replicates(
            [full, half], [truth, truth], grid_positions(100)
        )
        assert report.dr == pytest.approx(0.75)
        assert report.sd_dr == pytest.approx(0.35355339059327373)

    def test_null_replicates_drive_fwer(self):
        null = TruthSet.null(100)
        detections = [[], [], [Region(5, 8)], []]
        report = aggregate_replicates(
            detections, [null] * 4, grid_positions(100)
        )
        assert report.fwer == 0.25
        assert report.n_null_replicates == 4
        assert report.dr == 0.0

    def test_all_null_no_detections(self):
        null = TruthSet.null(50)
        report = aggregate_replicates([[], []], [null, null], grid_positions(50))
        assert report.fwer == 0.0

    def test_selection_probability(self):
        truth = truth_with([Region(0, 10)])
        detections = [[Region(0, 4)], [Region(2, 6)]]
        report = aggregate_replicates(detections, [truth] * 2, grid_positions(50))
        np.testing.assert_allclose(report.selection_prob[0:2], [0.5, 0.5])
        np.testing.assert_allclose(report.selection_prob[2:4], [1.0, 1.0])
        np.testing.assert_allclose(report.selection_prob[4:6], [0.5, 0.5])
        np.testing.assert_allclose(report.selection_prob[6:], 0.0)

    def test_fdr_map_monotone_in_report(self):
        rng = np.random.default_rng(1)
        truth = truth_with([Region(100, 130)])
        pos = grid_positions(2_000)
        detections = []
        for _ in range(20):
            start = int(rng.integers(0, 1_900))
            detections.append([Region(start, start + 30), Region(110, 120)])
        report = aggregate_replicates(detections, [truth] * 20, pos)
        assert report.fdr_h[25] >= report.fdr_h[50] >= report.fdr_h[75]

    def test_exact_recovery_characterization(self):
        truth = truth_with([Region(10, 20), Region(40, 50)])
        pos = grid_positions(100)
        exact = [Region(10, 20), Region(40, 50)]
        report = aggregate_replicates([exact], [truth], pos, h_kb=(25,))
        assert report.tpr == 1.0 and report.fdr_h[25] == 0.0
        sloppy = [Region(10, 20), Region(40, 51)]
        report2 = aggregate_replicates([sloppy], [truth], pos, h_kb=(0,))
        assert report2.tpr == 1.0 and report2.fdr_h[0] > 0.0
