"""Metric definitions and their brute-force pixel-counting oracles."""

import numpy as np
import pytest

from trajseg import CorpusScores, Point, SamplePair, aggregate, centroid_sq_dist, mask_iou


def iou_by_counting(pred: np.ndarray, gt: np.ndarray) -> float:
    """Independent per-pixel loop oracle."""
    inter = 0
    union = 0
    for y in range(pred.shape[0]):
        for x in range(pred.shape[1]):
            if pred[y, x] and gt[y, x]:
                inter += 1
            if pred[y, x] or gt[y, x]:
                union += 1
    if union == 0:
        return 1.0
    return inter / union


def two_sample_corpus() -> list[SamplePair]:
    """Pairs with (intersection, union) = (1, 2) and (3, 4)."""
    p1 = np.zeros((3, 3), dtype=bool)
    g1 = np.zeros((3, 3), dtype=bool)
    p1[0, 0] = True
    g1[0, 0] = g1[0, 1] = True
    p2 = np.zeros((3, 3), dtype=bool)
    g2 = np.zeros((3, 3), dtype=bool)
    p2[1, :3] = True
    g2[1, :3] = g2[2, 0] = True
    return [SamplePair(p1, g1), SamplePair(p2, g2)]


class TestMaskIoU:
    def test_identical(self):
        m = np.eye(4, dtype=bool)
        assert mask_iou(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((3, 3), dtype=bool)
        b = np.zeros((3, 3), dtype=bool)
        a[0, 0] = b[2, 2] = True
        assert mask_iou(a, b) == 0.0

    def test_one_pixel_overlap(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0:2, 0:2] = True
        b[1:3, 1:3] = True
        assert mask_iou(a, b) == pytest.approx(1 / 7)

    def test_empty_conventions(self):
        e = np.zeros((3, 3), dtype=bool)
        f = np.ones((3, 3), dtype=bool)
        assert mask_iou(e, e) == 1.0
        assert mask_iou(e, f) == 0.0
        assert mask_iou(f, e) == 0.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            mask_iou(np.zeros((2, 2), dtype=bool), np.zeros((3, 3), dtype=bool))

    def test_matches_counting_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            a = rng.random((8, 8)) < rng.uniform(0, 1)
            b = rng.random((8, 8)) < rng.uniform(0, 1)
            assert mask_iou(a, b) == iou_by_counting(a, b)
            assert mask_iou(a, b) == mask_iou(b, a)


class TestAggregate:
    def test_worked_two_sample_corpus(self):
        scores = aggregate(two_sample_corpus())
        assert scores.giou == pytest.approx(0.625, abs=1e-9)
        assert scores.ciou == pytest.approx(4 / 6, abs=1e-9)

    def test_perfect_predictions(self):
        rng = np.random.default_rng(32)
        pairs = []
        for _ in range(5):
            m = rng.random((6, 6)) < 0.5
            m[0, 0] = True
            pairs.append(SamplePair(m, m.copy()))
        scores = aggregate(pairs)
        assert scores.ciou == scores.giou == scores.acc_at_05 == 1.0

    def test_all_empty_predictions(self):
        gt = np.ones((4, 4), dtype=bool)
        pairs = [SamplePair(np.zeros_like(gt), gt) for _ in range(3)]
        scores = aggregate(pairs)
        assert scores.ciou == scores.giou == scores.acc_at_05 == 0.0

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_duplication_invariance(self):
        pair = two_sample_corpus()[1]
        one = aggregate([pair])
        many = aggregate([pair] * 7)
        assert many.ciou == pytest.approx(one.ciou)
        assert many.giou == pytest.approx(one.giou)

    def test_ciou_between_min_and_max_sample_iou(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            pairs = []
            for _ in range(4):
                a = rng.random((8, 8)) < 0.5
                b = rng.random((8, 8)) < 0.5
                a[0, 0] = b[0, 0] = True
                pairs.append(SamplePair(a, b))
            ious = [mask_iou(p.pred, p.gt) for p in pairs]
            scores = aggregate(pairs)
            assert min(ious) - 1e-12 <= scores.ciou <= max(ious) + 1e-12

    def test_parse_failure_count_carried(self):
        scores = aggregate(two_sample_corpus(), n_parse_failures=1)
        assert scores.n_parse_failures == 1
        assert isinstance(scores, CorpusScores)


class TestCentroidSqDist:
    def test_single_axis(self):
        assert centroid_sq_dist(Point(0.6, 0.5), Point(0.5, 0.5)) == pytest.approx(0.005)

    def test_identical(self):
        assert centroid_sq_dist(Point(0.3, 0.7), Point(0.3, 0.7)) == 0.0

    def test_maximum(self):
        assert centroid_sq_dist(Point(0, 0), Point(1, 1)) == 1.0

    def test_plain_euclidean_mode(self):
        assert centroid_sq_dist(Point(0, 0), Point(1, 1), mean=False) == 2.0

    def test_bounded_on_unit_square(self):
        rng = np.random.default_rng(34)
        for _ in range(100):
            a = Point(*rng.uniform(0, 1, 2))
            b = Point(*rng.uniform(0, 1, 2))
            d = centroid_sq_dist(a, b)
            assert 0.0 <= d <= 1.0
            assert (d == 0.0) == (a == b)
