"""Detection evaluation: IOU, confusion counts, accuracy/precision/
recall/F1, precision-recall curves, AP and mAP, plus the iterations to
epochs conversion used when reading training logs.

Matching is greedy in score order with single assignment per ground
truth: a second box on an already-matched truth counts as a false
positive.  True negatives are uncountable in open-scene detection, so
TN stays 0 and the accuracy figure carries a caveat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyTruthSet, NoClassesEvaluated, UndefinedAP, ZeroImages

Box = tuple[float, float, float, float]  # (cx, cy, w, h), any consistent unit


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0  # fixed at 0 for detection

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


@dataclass
class PRPoint:
    precision: float
    recall: float
    threshold: float


@dataclass
class EvalReport:
    per_class_ap: dict[int, float]
    mean_ap: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    counts: ConfusionCounts
    curve: list[PRPoint]
    conf_threshold: float
    iou_threshold: float
    n_images: int = 0
    accuracy_note: str = "TN is uncountable in open scenes and fixed at 0"

    def to_dict(self) -> dict:
        return {
            "mAP": self.mean_ap,
            "per_class_ap": {str(k): v for k, v in self.per_class_ap.items()},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "accuracy_note": self.accuracy_note,
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                       "fn": self.counts.fn, "tn": self.counts.tn},
            "conf_threshold": self.conf_threshold,
            "iou_threshold": self.iou_threshold,
            "n_images": self.n_images,
            "pr_curve": [[p.threshold, p.precision, p.recall] for p in self.curve],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"images: {self.n_images}",
            f"mAP@{int(self.iou_threshold * 100)}: {self.mean_ap:.4f}",
        ]
        for cls, ap in sorted(self.per_class_ap.items()):
            lines.append(f"AP class {cls}: {ap:.4f}")
        lines += [
            f"precision: {self.precision:.4f}",
            f"recall: {self.recall:.4f}",
            f"F1: {self.f1:.4f}",
            f"accuracy: {self.accuracy:.4f}  # {self.accuracy_note}",
            f"TP: {self.counts.tp}  FP: {self.counts.fp}  FN: {self.counts.fn}  TN: {self.counts.tn}",
            f"confidence threshold: {self.conf_threshold}",
        ]
        return "\n".join(lines) + "\n"

    def curve_csv(self) -> str:
        rows = ["threshold,precision,recall"]
        rows += [f"{p.threshold:.6f},{p.precision:.6f},{p.recall:.6f}" for p in self.curve]
        return "\n".join(rows) + "\n"


def iou(a: Box, b: Box) -> float:
    """Area of overlap over area of union; 0 when the union is empty.

    Areas derive from the same corner values as the intersection, so
    identical boxes give exactly 1.0.
    """
    ax0, ay0, ax1, ay1 = a[0] - a[2] / 2, a[1] - a[3] / 2, a[0] + a[2] / 2, a[1] + a[3] / 2
    bx0, by0, bx1, by1 = b[0] - b[2] / 2, b[1] - b[3] / 2, b[0] + b[2] / 2, b[1] + b[3] / 2
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    inter = iw * ih if iw > 0 and ih > 0 else 0.0
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def match_detections(dets: Sequence, truths: Sequence, iou_threshold: float = 0.5,
                     ) -> tuple[ConfusionCounts, list[bool]]:
    """Greedily match detections to ground truths of the same class.

    ``dets`` need ``.class_id``, ``.score`` and ``.box``; ``truths`` need
    ``.class_id`` and ``.box`` in the same coordinate space.  Returns the
    confusion counts and a TP flag per detection in input order.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    matched = [False] * len(truths)
    flags = [False] * len(dets)
    for i in order:
        det = dets[i]
        best_j, best_iou = -1, -1.0  # ties in IOU go to the lowest truth index
        for j, truth in enumerate(truths):
            if matched[j] or truth.class_id != det.class_id:
                continue
            v = iou(det.box, truth.box)
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= iou_threshold:
            matched[best_j] = True
            flags[i] = True
    tp = sum(flags)
    counts = ConfusionCounts(tp=tp, fp=len(dets) - tp, fn=len(truths) - tp, tn=0)
    return counts, flags


def precision(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def recall(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def f1_from_pr(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def f1(c: ConfusionCounts) -> float:
    return f1_from_pr(precision(c), recall(c))


def accuracy(c: ConfusionCounts) -> float:
    total = c.tp + c.tn + c.fp + c.fn
    return (c.tp + c.tn) / total if total else 0.0


def pr_curve(scores: Sequence[float], flags: Sequence[bool], total_truths: int,
             ) -> list[PRPoint]:
    """One precision/recall sample per prefix of the score-sorted detections."""
    if total_truths == 0:
        raise EmptyTruthSet("PR curve undefined without ground truths")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points = []
    tp = 0
    for n, i in enumerate(order, start=1):
        tp += bool(flags[i])
        points.append(PRPoint(precision=tp / n, recall=tp / total_truths,
                              threshold=float(scores[i])))
    return points


def average_precision(curve: Sequence[PRPoint], total_truths: int | None = None) -> float:
    """Area under the step precision-recall curve:
    sum of (recall_n - recall_{n-1}) * precision_n with recall_0 = 0."""
    if total_truths == 0:
        raise UndefinedAP("no ground truths")
    ap = 0.0
    prev_recall = 0.0
    for p in curve:
        ap += (p.recall - prev_recall) * p.precision
        prev_recall = p.recall
    return ap


def mean_ap(per_class: Mapping[int, float | None]) -> float:
    """Arithmetic mean of AP over classes that have ground truths."""
    values = [v for v in per_class.values() if v is not None]
    if not values:
        raise NoClassesEvaluated("no class has any ground truth")
    return sum(values) / len(values)


def epochs_from_iterations(batch: int, iterations: int, n_images: int) -> float:
    """epochs = batch size * iterations / number of images."""
    if n_images <= 0:
        raise ZeroImages("dataset has no images")
    return batch * iterations / n_images


def evaluate_matches(det_records: Iterable[tuple[int, float, bool]],
                     truths_per_class: Mapping[int, int],
                     conf_threshold: float, iou_threshold: float,
                     n_images: int = 0) -> EvalReport:
    """Build an EvalReport from pooled per-detection records.

    ``det_records`` are (class_id, score, tp_flag) pooled across images;
    ``truths_per_class`` counts ground truths per class.
    """
    records = list(det_records)
    tp = sum(1 for _, _, flag in records if flag)
    total_truths = sum(truths_per_class.values())
    counts = ConfusionCounts(tp=tp, fp=len(records) - tp, fn=total_truths - tp, tn=0)

    per_class_ap: dict[int, float] = {}
    for cls, n_truth in sorted(truths_per_class.items()):
        if n_truth == 0:
            continue
        cls_records = [(s, f) for c, s, f in records if c == cls]
        curve = pr_curve([s for s, _ in cls_records], [f for _, f in cls_records], n_truth)
        per_class_ap[cls] = average_precision(curve, n_truth)

    overall_curve: list[PRPoint] = []
    if total_truths:
        overall_curve = pr_curve([s for _, s, _ in records],
                                 [f for _, _, f in records], total_truths)

    return EvalReport(
        per_class_ap=per_class_ap,
        mean_ap=mean_ap(per_class_ap) if per_class_ap else 0.0,
        precision=precision(counts),
        recall=recall(counts),
        f1=f1(counts),
        accuracy=accuracy(counts),
        counts=counts,
        curve=overall_curve,
        conf_threshold=conf_threshold,
        iou_threshold=iou_threshold,
        n_images=n_images,
    )
