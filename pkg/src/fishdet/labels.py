"""Per-image label files: one `class cx cy w h` line per box, with
coordinates normalized to [0, 1] fractions of the image dimensions.

Origin is the top-left corner, y growing downward, matching the raster
convention and the labeling tools this format comes from.  An empty
file is a valid background image.  Canonical output uses 6 decimals so
write -> parse -> write round-trips byte-exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import MalformedLine, OutOfRangeCoordinate

log = logging.getLogger(__name__)

CLAMP_WARN_TOLERANCE = 1e-6


@dataclass
class GroundTruthBox:
    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)


def parse_labels(text: str) -> list[GroundTruthBox]:
    boxes = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise MalformedLine(line_no, f"expected 5 fields, got {len(parts)}")
        try:
            class_id = int(parts[0])
            coords = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from exc
        if class_id < 0:
            raise MalformedLine(line_no, f"negative class id {class_id}")
        for v in coords:
            if not 0.0 <= v <= 1.0:
                raise OutOfRangeCoordinate(line_no, v)
        boxes.append(GroundTruthBox(class_id, *coords))
    return boxes


def write_labels(boxes: list[GroundTruthBox]) -> str:
    """Canonical 6-decimal serialization, clamping stray coordinates to [0, 1]."""
    lines = []
    for b in boxes:
        vals = []
        for v in (b.cx, b.cy, b.w, b.h):
            clamped = min(max(v, 0.0), 1.0)
            if abs(clamped - v) > CLAMP_WARN_TOLERANCE:
                log.warning("clamped coordinate %.6f to %.6f", v, clamped)
            vals.append(clamped)
        lines.append(f"{b.class_id} " + " ".join(f"{v:.6f}" for v in vals))
    return "\n".join(lines) + ("\n" if lines else "")
