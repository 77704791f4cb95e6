"""The evaluation metrics, traced on a dataset small enough to check by
hand, plus consistency checks against a real training log.
"""

import numpy as np

from fishdet import average_precision, iou, match_detections, pr_curve
from fishdet.labels import GroundTruthBox
from fishdet.metrics import (
    ConfusionCounts,
    accuracy,
    epochs_from_iterations,
    f1,
    f1_from_pr,
    precision,
    recall,
)


class ScoredBox:
    def __init__(self, box, score, class_id=0):
        self.box, self.score, self.class_id = box, score, class_id


print("-- IOU --")
a = (1.0, 1.0, 2.0, 2.0)   # corners (0,0)-(2,2)
b = (2.0, 2.0, 2.0, 2.0)   # corners (1,1)-(3,3)
print(f"identical boxes:     {iou(a, a):.4f}")
print(f"offset by one unit:  {iou(a, b):.4f}  (overlap 1 over union 7)")

print("\n-- matching protocol --")
truths = [GroundTruthBox(0, 0.30, 0.30, 0.20, 0.20),
          GroundTruthBox(0, 0.70, 0.70, 0.20, 0.20)]
dets = [
    ScoredBox((0.30, 0.30, 0.20, 0.20), 0.95),  # clean hit
    ScoredBox((0.31, 0.30, 0.20, 0.20), 0.80),  # second box on the same fish -> FP
    ScoredBox((0.10, 0.90, 0.10, 0.10), 0.60),  # spurious
]
counts, flags = match_detections(dets, truths, iou_threshold=0.5)
print(f"flags per detection: {flags}")
print(f"TP={counts.tp} FP={counts.fp} FN={counts.fn} (double boxes are penalized)")

print("\n-- derived ratios --")
print(f"precision = {precision(counts):.4f}")
print(f"recall    = {recall(counts):.4f}")
print(f"F1        = {f1(counts):.4f}")
print(f"accuracy  = {accuracy(counts):.4f}   (TN fixed at 0: uncountable in open scenes)")

print("\n-- PR curve and AP --")
scores = [d.score for d in dets]
curve = pr_curve(scores, flags, total_truths=len(truths))
for p in curve:
    print(f"  threshold {p.threshold:.2f}: precision {p.precision:.3f} recall {p.recall:.3f}")
print(f"AP (area under the step curve) = {average_precision(curve):.4f}")

print("\n-- recomputing F1 from published training tables --")
rows = [(0.53, 0.50, 0.51), (0.74, 0.69, 0.72), (0.83, 0.87, 0.85)]
for p, r, printed in rows:
    print(f"  P={p:.2f} R={r:.2f}: F1 = {f1_from_pr(p, r):.4f} (printed {printed})")

print("\n-- iterations to epochs --")
for iters, n in [(1000, 459), (2000, 459), (1000, 2667)]:
    print(f"  batch 64, {iters} iterations over {n} images -> "
          f"{epochs_from_iterations(64, iters, n):.1f} epochs")
