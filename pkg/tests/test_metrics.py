import itertools

import numpy as np
import pytest

from fishdet.errors import EmptyTruthSet, NoClassesEvaluated, UndefinedAP, ZeroImages
from fishdet.labels import GroundTruthBox
from fishdet.metrics import (
    ConfusionCounts,
    accuracy,
    average_precision,
    epochs_from_iterations,
    f1,
    f1_from_pr,
    iou,
    match_detections,
    mean_ap,
    pr_curve,
    precision,
    recall,
)
from oracles import average_precision_reference, match_reference, raster_iou


class Det:
    """Bare scored box for matching tests."""

    def __init__(self, box, score=0.9, class_id=0):
        self.box = box
        self.score = score
        self.class_id = class_id


class TestIou:
    def test_identity(self):
        assert iou((1, 1, 2, 2), (1, 1, 2, 2)) == 1.0

    def test_disjoint(self):
        assert iou((0, 0, 2, 2), (10, 10, 2, 2)) == 0.0

    def test_one_seventh(self):
        # corner boxes (0,0)-(2,2) and (1,1)-(3,3): overlap 1, union 7
        a = (1.0, 1.0, 2.0, 2.0)
        b = (2.0, 2.0, 2.0, 2.0)
        assert iou(a, b) == pytest.approx(1 / 7)

    def test_zero_union(self):
        assert iou((0, 0, 0, 0), (0, 0, 0, 0)) == 0.0

    def test_symmetry_and_range(self):
        rng = np.random.RandomState(0)
        for _ in range(200):
            a = tuple(rng.uniform(0, 10, 2)) + tuple(rng.uniform(0.1, 5, 2))
            b = tuple(rng.uniform(0, 10, 2)) + tuple(rng.uniform(0.1, 5, 2))
            v = iou(a, b)
            assert v == iou(b, a)
            assert 0.0 <= v <= 1.0
            assert (v == 1.0) == (a == b) or v < 1.0

    def test_identical_iff_one(self):
        rng = np.random.RandomState(1)
        for _ in range(100):
            a = tuple(rng.uniform(0, 10, 2)) + tuple(rng.uniform(0.5, 5, 2))
            assert iou(a, a) == 1.0
            shifted = (a[0] + 0.01, a[1], a[2], a[3])
            assert iou(a, shifted) < 1.0


class TestMatching:
    def test_exact_hit(self):
        truth = [GroundTruthBox(0, 0.5, 0.5, 0.2, 0.2)]
        dets = [Det((0.5, 0.5, 0.2, 0.2))]
        counts, flags = match_detections(dets, truth, 0.5)
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == (1, 0, 0, 0)
        assert flags == [True]

    def test_double_box_penalty(self):
        truth = [GroundTruthBox(0, 0.5, 0.5, 0.2, 0.2)]
        dets = [Det((0.5, 0.5, 0.2, 0.2), score=0.9),
                Det((0.5, 0.5, 0.2, 0.2), score=0.8)]
        counts, flags = match_detections(dets, truth, 0.5)
        assert (counts.tp, counts.fp) == (1, 1)
        assert flags == [True, False]

    def test_all_missed(self):
        truths = [GroundTruthBox(0, x / 10, 0.5, 0.05, 0.05) for x in range(1, 4)]
        counts, flags = match_detections([], truths, 0.5)
        assert (counts.tp, counts.fp, counts.fn) == (0, 0, 3)

    def test_class_must_match(self):
        truth = [GroundTruthBox(1, 0.5, 0.5, 0.2, 0.2)]
        dets = [Det((0.5, 0.5, 0.2, 0.2), class_id=0)]
        counts, _ = match_detections(dets, truth, 0.5)
        assert (counts.tp, counts.fp, counts.fn) == (0, 1, 1)

    def test_count_identities(self):
        rng = np.random.RandomState(2)
        for _ in range(100):
            n_det, n_truth = rng.randint(0, 6), rng.randint(0, 5)
            dets = [Det((rng.uniform(0, 4), rng.uniform(0, 4),
                         rng.uniform(0.5, 2), rng.uniform(0.5, 2)),
                        score=rng.rand()) for _ in range(n_det)]
            truths = [GroundTruthBox(0, rng.uniform(0, 4), rng.uniform(0, 4),
                                     rng.uniform(0.5, 2), rng.uniform(0.5, 2))
                      for _ in range(n_truth)]
            counts, flags = match_detections(dets, truths, 0.5)
            assert counts.tp + counts.fn == n_truth
            assert counts.tp + counts.fp == n_det
            assert counts.tp == sum(flags)


class TestRatios:
    def test_table_row_stage_one_best(self):
        assert f1_from_pr(0.74, 0.69) == pytest.approx(0.714, abs=0.001)

    def test_table_row_stage_two_final(self):
        assert f1_from_pr(0.83, 0.87) == pytest.approx(0.849, abs=0.001)

    def test_zero_conventions(self):
        c = ConfusionCounts(tp=0, fp=0, fn=5)
        assert precision(c) == 0.0
        assert recall(c) == 0.0
        assert f1(c) == 0.0

    def test_accuracy_verbatim(self):
        c = ConfusionCounts(tp=3, fp=1, fn=2, tn=0)
        assert accuracy(c) == pytest.approx(3 / 6)
        assert accuracy(ConfusionCounts()) == 0.0

    def test_f1_bounds(self):
        rng = np.random.RandomState(3)
        for _ in range(200):
            c = ConfusionCounts(tp=rng.randint(0, 10), fp=rng.randint(0, 10),
                                fn=rng.randint(0, 10))
            p, r, f = precision(c), recall(c), f1(c)
            assert 0.0 <= f <= 1.0
            assert f <= min(1.0, 2 * min(p, r)) + 1e-12
            assert f <= (p + r) / 2 + 1e-12


class TestPrCurve:
    def test_all_tp_prefixes(self):
        points = pr_curve([0.9, 0.8, 0.7], [True, True, True], 3)
        assert [(p.precision, p.recall) for p in points] == [
            (1.0, 1 / 3), (1.0, 2 / 3), (1.0, 1.0)]

    def test_single_fp(self):
        (p,) = pr_curve([0.9], [False], 2)
        assert (p.precision, p.recall) == (0.0, 0.0)

    def test_alternating(self):
        points = pr_curve([0.9, 0.8, 0.7, 0.6], [True, False, True, False], 2)
        assert [(p.precision, p.recall) for p in points] == [
            (1.0, 0.5), (0.5, 0.5), (2 / 3, 1.0), (0.5, 1.0)]

    def test_recall_monotone(self):
        rng = np.random.RandomState(4)
        scores = rng.rand(20).tolist()
        flags = (rng.rand(20) > 0.5).tolist()
        points = pr_curve(scores, flags, 15)
        recalls = [p.recall for p in points]
        assert recalls == sorted(recalls)

    def test_empty_truths_rejected(self):
        with pytest.raises(EmptyTruthSet):
            pr_curve([0.9], [False], 0)


class TestAveragePrecision:
    def test_perfect_detector(self):
        curve = pr_curve([0.9, 0.8], [True, True], 2)
        assert average_precision(curve) == 1.0

    def test_tp_fp_tp_hand_value(self):
        curve = pr_curve([0.9, 0.8, 0.7], [True, False, True], 2)
        assert average_precision(curve) == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3))

    def test_no_tps(self):
        curve = pr_curve([0.9, 0.8], [False, False], 3)
        assert average_precision(curve) == 0.0

    def test_undefined_without_truths(self):
        with pytest.raises(UndefinedAP):
            average_precision([], total_truths=0)

    def test_invariant_under_monotone_score_rescale(self):
        rng = np.random.RandomState(5)
        scores = rng.rand(15).tolist()
        flags = (rng.rand(15) > 0.4).tolist()
        base = average_precision(pr_curve(scores, flags, 10))
        for transform in (lambda s: s * 0.5, lambda s: s ** 3, lambda s: s + 4):
            rescored = [transform(s) for s in scores]
            assert average_precision(pr_curve(rescored, flags, 10)) == pytest.approx(base)


class TestMeanAp:
    def test_single_class_identity(self):
        assert mean_ap({0: 0.8809}) == 0.8809

    def test_two_classes(self):
        assert mean_ap({0: 1.0, 1: 0.0}) == 0.5

    def test_undefined_classes_excluded(self):
        assert mean_ap({0: 0.6, 1: None}) == 0.6

    def test_no_classes(self):
        with pytest.raises(NoClassesEvaluated):
            mean_ap({0: None})


class TestEpochs:
    def test_first_training_stage(self):
        assert epochs_from_iterations(64, 1000, 459) == pytest.approx(139.4, abs=0.05)

    def test_larger_dataset(self):
        assert epochs_from_iterations(64, 1000, 2667) == pytest.approx(24.0, abs=0.05)

    def test_zero_iterations(self):
        assert epochs_from_iterations(64, 0, 459) == 0.0

    def test_zero_images(self):
        with pytest.raises(ZeroImages):
            epochs_from_iterations(64, 1000, 0)


def lattice_boxes(coords):
    """All (x0, y0, x1, y1) with corners drawn from ``coords``."""
    pairs = [(a, b) for a, b in itertools.combinations(sorted(coords), 2)]
    return [(x0, y0, x1, y1) for (x0, x1) in pairs for (y0, y1) in pairs]


def corners_to_center(box):
    x0, y0, x1, y1 = box
    return ((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)


def run_lattice_instance(det_boxes, truth_boxes, iou_threshold=0.5):
    """Compare implementation vs brute-force reference on one instance."""
    scores = [0.9 - 0.1 * i for i in range(len(det_boxes))]
    dets = [Det(corners_to_center(b), score=s) for b, s in zip(det_boxes, scores)]
    truths = [GroundTruthBox(0, *corners_to_center(b)) for b in truth_boxes]
    counts, flags = match_detections(dets, truths, iou_threshold)

    ref_flags = match_reference(det_boxes, scores, [0] * len(det_boxes),
                                truth_boxes, [0] * len(truth_boxes), iou_threshold)
    assert flags == ref_flags, (det_boxes, truth_boxes)

    if truth_boxes:
        curve = pr_curve(scores, flags, len(truth_boxes))
        ap = average_precision(curve)
        ref_ap = average_precision_reference(scores, ref_flags, len(truth_boxes))
        assert ap == pytest.approx(ref_ap, abs=1e-12)


class TestLatticeOracle:
    def test_raster_iou_agrees_with_analytic(self):
        boxes = lattice_boxes(range(4))
        for a, b in itertools.product(boxes, repeat=2):
            assert iou(corners_to_center(a), corners_to_center(b)) == pytest.approx(
                raster_iou(a, b), abs=1e-12)

    def test_small_exhaustive_sample(self):
        """Complete sweep on the 2-value sub-lattice; the full 4x4
        enumeration runs in the acceptance suite."""
        boxes = lattice_boxes([0, 2, 3])
        for n_det, n_truth in itertools.product(range(3), range(3)):
            for det_boxes in itertools.combinations_with_replacement(boxes, n_det):
                for truth_boxes in itertools.combinations_with_replacement(boxes, n_truth):
                    run_lattice_instance(list(det_boxes), list(truth_boxes))
