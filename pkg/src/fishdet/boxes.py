"""Decoding of head tensors into scored boxes, thresholding, NMS and
mapping back to original-image coordinates.

A decoded prediction array has one row per (cell, anchor) of layout
[cx, cy, w, h, objectness, p_class_0 .. p_class_{C-1}] with box values
in network-input pixels.  Rows are ordered cell-row-major, anchors
fastest, so a 13x13 head with 3 anchors yields exactly 507 rows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ChannelCountMismatch
from .image import LetterboxInfo
from .metrics import iou as box_iou
from .netdef import YoloHead

DEFAULT_CONF_THRESHOLD = 0.25  # the retention threshold the workflow fixes
DEFAULT_NMS_THRESHOLD = 0.45


@dataclass
class Detection:
    cx: float
    cy: float
    w: float
    h: float
    objectness: float
    class_probs: np.ndarray
    class_id: int
    score: float

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def corners(self) -> tuple[float, float, float, float]:
        return (self.cx - self.w / 2, self.cy - self.h / 2,
                self.cx + self.w / 2, self.cy + self.h / 2)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def decode_head(head: np.ndarray, spec: YoloHead, input_dims: tuple[int, int]) -> np.ndarray:
    """Decode one raw head tensor into an (S*S*3, 5+C) prediction array.

    Per cell and anchor: center = (cell + sigmoid(t_xy)) * cell size,
    size = anchor * exp(t_wh), objectness and per-class probabilities
    sigmoid-activated independently (multi-label, no softmax).
    """
    c = spec.classes
    n_anchor = len(spec.mask)
    if head.shape[0] != n_anchor * (5 + c):
        raise ChannelCountMismatch(
            f"head has {head.shape[0]} channels, expected {n_anchor * (5 + c)}")
    s_h, s_w = head.shape[1], head.shape[2]
    in_w, in_h = input_dims
    stride_x = in_w / s_w
    stride_y = in_h / s_h

    t = head.reshape(n_anchor, 5 + c, s_h, s_w).astype(np.float64)
    grid_x = np.arange(s_w, dtype=np.float64)[None, None, :]
    grid_y = np.arange(s_h, dtype=np.float64)[None, :, None]
    anchors = np.array([spec.anchors[m] for m in spec.mask], dtype=np.float64)

    cx = (grid_x + _sigmoid(t[:, 0])) * stride_x
    cy = (grid_y + _sigmoid(t[:, 1])) * stride_y
    w = anchors[:, 0, None, None] * np.exp(t[:, 2])
    h = anchors[:, 1, None, None] * np.exp(t[:, 3])
    obj = _sigmoid(t[:, 4])
    cls = _sigmoid(t[:, 5:])

    # rows ordered (cell row, cell col, anchor)
    parts = [cx, cy, w, h, obj] + [cls[:, j] for j in range(c)]
    stacked = np.stack(parts, axis=-1)          # (anchor, S, S, 5+C)
    return stacked.transpose(1, 2, 0, 3).reshape(-1, 5 + c)


def score_and_filter(preds: np.ndarray, conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                     ) -> list[Detection]:
    """Keep predictions with objectness * best class probability >= threshold.

    Output sorted by descending score; class ties resolve to the lowest
    class index.
    """
    if not 0.0 <= conf_threshold <= 1.0:
        raise ValueError(f"confidence threshold {conf_threshold} outside [0, 1]")
    if len(preds) == 0:
        return []
    cls = preds[:, 5:]
    class_ids = np.argmax(cls, axis=1)
    best = cls[np.arange(len(cls)), class_ids]
    scores = preds[:, 4] * best
    keep = np.flatnonzero(scores >= conf_threshold)
    order = keep[np.argsort(-scores[keep], kind="stable")]
    return [
        Detection(
            cx=float(preds[i, 0]), cy=float(preds[i, 1]),
            w=float(preds[i, 2]), h=float(preds[i, 3]),
            objectness=float(preds[i, 4]),
            class_probs=preds[i, 5:].copy(),
            class_id=int(class_ids[i]),
            score=float(scores[i]),
        )
        for i in order
    ]


def nms(dets: list[Detection], iou_threshold: float = DEFAULT_NMS_THRESHOLD) -> list[Detection]:
    """Greedy per-class suppression: keep the best remaining box, drop
    same-class boxes overlapping it beyond the threshold."""
    remaining = sorted(dets, key=lambda d: -d.score)
    kept: list[Detection] = []
    while remaining:
        best = remaining.pop(0)
        kept.append(best)
        remaining = [
            d for d in remaining
            if d.class_id != best.class_id or box_iou(d.box, best.box) <= iou_threshold
        ]
    return kept


def merge_scales(per_head: list[list[Detection]]) -> list[Detection]:
    """Union of the per-scale detection lists, re-sorted by score.

    No suppression happens here; callers run NMS on the merged list.
    """
    merged = [d for dets in per_head for d in dets]
    merged.sort(key=lambda d: -d.score)
    return merged


def unletterbox(dets: list[Detection], info: LetterboxInfo) -> list[Detection]:
    """Map boxes from network-input pixels back to original-image pixels.

    Boxes are clamped to the image bounds; boxes that collapse to zero
    area (entirely inside the padded margins) are dropped.
    """
    out = []
    for d in dets:
        cx = (d.cx - info.pad_x) / info.scale
        cy = (d.cy - info.pad_y) / info.scale
        w = d.w / info.scale
        h = d.h / info.scale
        x0 = min(max(cx - w / 2, 0.0), info.original_w)
        x1 = min(max(cx + w / 2, 0.0), info.original_w)
        y0 = min(max(cy - h / 2, 0.0), info.original_h)
        y1 = min(max(cy + h / 2, 0.0), info.original_h)
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            continue
        out.append(replace(d, cx=(x0 + x1) / 2, cy=(y0 + y1) / 2, w=x1 - x0, h=y1 - y0))
    return out


def format_detections(dets: list[Detection]) -> str:
    """Line-oriented text form: `class score cx cy w h` in image pixels."""
    lines = [f"{d.class_id} {d.score:.6f} {d.cx:.2f} {d.cy:.2f} {d.w:.2f} {d.h:.2f}"
             for d in dets]
    return "\n".join(lines) + ("\n" if lines else "")


def detect_image(net, image: np.ndarray, conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                 nms_threshold: float = DEFAULT_NMS_THRESHOLD, workers: int = 1,
                 ) -> list[Detection]:
    """Full pipeline on one RGB raster: letterbox, forward, decode all
    scales, threshold, NMS, map back to original-image pixels."""
    from .engine import forward
    from .image import letterbox_preprocess

    p = net.definition.net_params
    tensor, info = letterbox_preprocess(image, (p.width, p.height))
    heads, _ = forward(net, tensor, workers=workers)
    head_specs = [net.definition.layers[i] for i in net.definition.head_indices]
    per_head = [
        score_and_filter(decode_head(h, spec, (p.width, p.height)), conf_threshold)
        for h, spec in zip(heads, head_specs)
    ]
    merged = nms(merge_scales(per_head), nms_threshold)
    return unletterbox(merged, info)
