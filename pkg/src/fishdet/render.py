"""Rendering of feature maps and annotated detection images.

Feature-map values are unbounded, so each map is min-max normalized and
pushed through a 256-entry viridis lookup table bundled with the
package (low -> dark blue, high -> yellow).
"""

from __future__ import annotations

import numpy as np

from ._viridis import VIRIDIS_RGB
from .boxes import Detection
from .errors import NonFiniteValue

_LUT = np.array(VIRIDIS_RGB, dtype=np.uint8)


def render(raster: np.ndarray) -> np.ndarray:
    """Colormap a single-channel raster into (H, W, 3) uint8.

    Affine min-max normalization to [0, 1]; a constant raster maps to
    the middle of the colormap.
    """
    m = np.asarray(raster, dtype=np.float64)
    if not np.isfinite(m).all():
        raise NonFiniteValue("raster contains NaN or Inf")
    lo, hi = m.min(), m.max()
    if hi > lo:
        unit = (m - lo) / (hi - lo)
    else:
        unit = np.full_like(m, 0.5)
    idx = np.round(unit * 255).astype(np.intp)
    return _LUT[idx]


def draw_detections(image: np.ndarray, dets: list[Detection],
                    color: tuple[int, int, int] = (255, 64, 64),
                    thickness: int = 2) -> np.ndarray:
    """Return a copy of the image with detection rectangles burned in."""
    out = np.array(image, dtype=np.uint8, copy=True)
    h, w = out.shape[:2]
    for d in dets:
        x0, y0, x1, y1 = (int(round(v)) for v in d.corners())
        x0, x1 = max(x0, 0), min(x1, w - 1)
        y0, y1 = max(y0, 0), min(y1, h - 1)
        if x1 <= x0 or y1 <= y0:
            continue
        for t in range(thickness):
            xa, xb = min(x0 + t, w - 1), max(x1 - t, 0)
            ya, yb = min(y0 + t, h - 1), max(y1 - t, 0)
            out[ya, xa:xb + 1] = color
            out[yb, xa:xb + 1] = color
            out[ya:yb + 1, xa] = color
            out[ya:yb + 1, xb] = color
    return out
