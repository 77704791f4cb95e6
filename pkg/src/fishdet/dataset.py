"""Dataset mechanics around the pseudo-labeling loop: label files on
disk, deterministic train/test splits, batch pseudo-labeling of an
image directory and evaluation of a labeled set.

A manifest is one JSON document recording every image, its label file,
split assignment, review state and revision, plus the seed and a
provenance note.  Review states only move forward:
unreviewed -> accepted | corrected, accepted -> corrected.
"""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .boxes import DEFAULT_CONF_THRESHOLD, DEFAULT_NMS_THRESHOLD, Detection, detect_image
from .errors import EmptyDataset, MissingLabelFile
from .image import load_image
from .labels import GroundTruthBox, parse_labels, write_labels
from .metrics import EvalReport, evaluate_matches, match_detections

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".ppm", ".png", ".jpg", ".jpeg", ".bmp"}
REVIEW_STATES = ("unreviewed", "accepted", "corrected")


@dataclass
class LabeledImage:
    image_path: str
    label_path: str
    split: str = "train"
    state: str = "unreviewed"
    revision: int = 1
    n_boxes: int = 0       # at pseudo-label time; the review queue sorts on these
    max_score: float = 0.0


@dataclass
class DatasetManifest:
    entries: list[LabeledImage] = field(default_factory=list)
    seed: int = 0
    test_fraction: float = 0.0
    provenance: str = ""
    summary: dict = field(default_factory=dict)

    def save(self, path) -> None:
        doc = {
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "provenance": self.provenance,
            "summary": self.summary,
            "entries": [asdict(e) for e in self.entries],
        }
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(doc, indent=2))
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        doc = json.loads(Path(path).read_text())
        return cls(
            entries=[LabeledImage(**e) for e in doc["entries"]],
            seed=doc.get("seed", 0),
            test_fraction=doc.get("test_fraction", 0.0),
            provenance=doc.get("provenance", ""),
            summary=doc.get("summary", {}),
        )


def find_images(directory) -> list[Path]:
    directory = Path(directory)
    return sorted(p for p in directory.iterdir()
                  if p.suffix.lower() in IMAGE_EXTENSIONS)


def split_dataset(entries: list[LabeledImage], test_fraction: float, seed: int,
                  ) -> DatasetManifest:
    """Deterministic shuffle and assignment; round(n * fraction) test items,
    guarded so at least one training item remains."""
    if not entries:
        raise EmptyDataset("nothing to split")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test fraction {test_fraction} outside (0, 1)")
    shuffled = list(entries)
    random.Random(seed).shuffle(shuffled)
    n_test = int(np.floor(len(shuffled) * test_fraction + 0.5))
    n_test = min(n_test, len(shuffled) - 1)
    for i, entry in enumerate(shuffled):
        entry.split = "test" if i < n_test else "train"
    return DatasetManifest(entries=shuffled, seed=seed, test_fraction=test_fraction,
                           provenance=f"split {len(shuffled)} entries, seed {seed}")


def detections_to_labels(dets: list[Detection], img_w: int, img_h: int,
                         ) -> list[GroundTruthBox]:
    """Detections in image pixels -> normalized label boxes."""
    return [
        GroundTruthBox(
            class_id=d.class_id,
            cx=d.cx / img_w, cy=d.cy / img_h,
            w=d.w / img_w, h=d.h / img_h,
        )
        for d in dets
    ]


def label_path_for(image_path: Path) -> Path:
    return image_path.with_suffix(".txt")


def pseudo_label(net, image_dir, conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                 nms_threshold: float = DEFAULT_NMS_THRESHOLD, workers: int = 1,
                 ) -> DatasetManifest:
    """Run detection over a directory and write one label file per image.

    Images the decoder chokes on are logged and skipped, never fatal.
    The returned manifest marks every labeled image unreviewed and
    carries a summary: image/box counts and a 10-bin score histogram.
    """
    images = find_images(image_dir)
    if not images:
        raise EmptyDataset(f"no images in {image_dir}")

    def process(path: Path):
        try:
            raster = load_image(path)
            dets = detect_image(net, raster, conf_threshold, nms_threshold)
            return path, dets, raster.shape[1], raster.shape[0], None
        except Exception as exc:  # per-image failures are recorded, not raised
            return path, None, 0, 0, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, images))
    else:
        results = [process(p) for p in images]

    manifest = DatasetManifest(provenance=f"pseudo-labeled at conf {conf_threshold}")
    histogram = [0] * 10
    n_boxes = 0
    skipped = []
    for path, dets, w, h, err in results:
        if err is not None:
            log.warning("skipping %s: %s", path, err)
            skipped.append({"image": str(path), "error": err})
            continue
        label_path = label_path_for(path)
        label_path.write_text(write_labels(detections_to_labels(dets, w, h)))
        manifest.entries.append(LabeledImage(
            image_path=str(path), label_path=str(label_path), state="unreviewed",
            n_boxes=len(dets), max_score=max((d.score for d in dets), default=0.0)))
        n_boxes += len(dets)
        for d in dets:
            histogram[min(int(d.score * 10), 9)] += 1
    manifest.summary = {
        "images": len(manifest.entries),
        "boxes": n_boxes,
        "score_histogram": histogram,
        "skipped": skipped,
        "conf_threshold": conf_threshold,
    }
    return manifest


def evaluate_dataset(net, manifest: DatasetManifest, iou_threshold: float = 0.5,
                     conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                     nms_threshold: float = DEFAULT_NMS_THRESHOLD,
                     workers: int = 1, split: str | None = None) -> EvalReport:
    """Detect every manifest image and score against its label file.

    Matching happens in normalized coordinates (IOU is invariant to the
    per-axis rescale).  Detections pool across images for the PR curve
    and AP; counts aggregate at the working confidence threshold.
    """
    entries = [e for e in manifest.entries if split is None or e.split == split]
    if not entries:
        raise EmptyDataset("no entries to evaluate")
    for e in entries:
        if not Path(e.label_path).exists():
            raise MissingLabelFile(e.label_path)

    def process(entry: LabeledImage):
        truths = parse_labels(Path(entry.label_path).read_text())
        raster = load_image(entry.image_path)
        h, w = raster.shape[:2]
        dets = detect_image(net, raster, conf_threshold, nms_threshold)
        normalized = [
            Detection(cx=d.cx / w, cy=d.cy / h, w=d.w / w, h=d.h / h,
                      objectness=d.objectness, class_probs=d.class_probs,
                      class_id=d.class_id, score=d.score)
            for d in dets
        ]
        _, flags = match_detections(normalized, truths, iou_threshold)
        records = [(d.class_id, d.score, f) for d, f in zip(normalized, flags)]
        return records, truths

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, entries))
    else:
        results = [process(e) for e in entries]

    det_records = []
    truths_per_class: dict[int, int] = {}
    for records, truths in results:
        det_records.extend(records)
        for t in truths:
            truths_per_class[t.class_id] = truths_per_class.get(t.class_id, 0) + 1

    return evaluate_matches(det_records, truths_per_class,
                            conf_threshold, iou_threshold, n_images=len(entries))
