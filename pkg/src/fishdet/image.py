"""Raster input/output and letterbox preprocessing.

Binary PPM (P6, 8-bit) is the baseline format and is handled here
bit-exactly; PNG/JPEG go through Pillow, whose decoded RGB bytes are
the interface contract.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyImage, TargetNotMultipleOf32

LETTERBOX_FILL = 0.5  # mid-gray, the margin value the published weights saw


@dataclass
class LetterboxInfo:
    scale: float
    pad_x: int
    pad_y: int
    original_w: int
    original_h: int


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a binary P6 PPM into an (H, W, 3) uint8 array."""
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM: magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only 8-bit PPM supported, maxval={maxval}")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return pixels.reshape(h, w, 3).copy()


def write_ppm(image: np.ndarray) -> bytes:
    h, w, _ = image.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def load_image(path) -> np.ndarray:
    """Read an image file as (H, W, 3) uint8 RGB."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P6":
        return read_ppm(data)
    from PIL import Image
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(path, image: np.ndarray) -> None:
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        path.write_bytes(write_ppm(image))
        return
    from PIL import Image
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(path)


def bilinear_resize(image: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resample of an (H, W, C) array to (out_h, out_w, C) float32.

    Samples at pixel centers ((i + 0.5) / scale - 0.5), edge-clamped.
    """
    h, w = image.shape[:2]
    if (out_w, out_h) == (w, h):
        return image.astype(np.float32)
    src = image.astype(np.float32)

    def axis_coords(n_out, n_in):
        x = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        lo = np.floor(x).astype(np.int64)
        frac = (x - lo).astype(np.float32)
        lo0 = np.clip(lo, 0, n_in - 1)
        lo1 = np.clip(lo + 1, 0, n_in - 1)
        return lo0, lo1, frac

    y0, y1, fy = axis_coords(out_h, h)
    x0, x1, fx = axis_coords(out_w, w)
    top = src[y0][:, x0] * (1 - fx)[None, :, None] + src[y0][:, x1] * fx[None, :, None]
    bot = src[y1][:, x0] * (1 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
    return top * (1 - fy)[:, None, None] + bot * fy[:, None, None]


def letterbox_preprocess(image: np.ndarray, target: tuple[int, int]) -> tuple[np.ndarray, LetterboxInfo]:
    """Aspect-preserving resize onto a (w, h) canvas, margins mid-gray.

    Returns a (3, target_h, target_w) float32 tensor scaled to [0, 1]
    plus the geometry needed to map detections back.
    """
    if image.ndim != 3 or image.shape[0] == 0 or image.shape[1] == 0:
        raise EmptyImage("image must be (H, W, 3) with at least one pixel")
    target_w, target_h = target
    if target_w % 32 or target_h % 32:
        raise TargetNotMultipleOf32(f"target {target_w}x{target_h}")

    h, w = image.shape[:2]
    scale = min(target_w / w, target_h / h)
    new_w = int(round(w * scale))
    new_h = int(round(h * scale))
    pad_x = (target_w - new_w) // 2
    pad_y = (target_h - new_h) // 2

    canvas = np.full((target_h, target_w, 3), LETTERBOX_FILL * 255.0, dtype=np.float32)
    canvas[pad_y:pad_y + new_h, pad_x:pad_x + new_w] = bilinear_resize(image, new_w, new_h)
    tensor = np.ascontiguousarray(canvas.transpose(2, 0, 1)) / np.float32(255.0)
    info = LetterboxInfo(scale=scale, pad_x=pad_x, pad_y=pad_y, original_w=w, original_h=h)
    return tensor.astype(np.float32), info
