"""Shared fixtures: synthetic weights blobs and a tiny hand-weighted
detector that fires on bright squares."""

from __future__ import annotations

import struct

import numpy as np
import pytest


def pytest_runtest_logreport(report):
    # one visible line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[{'PASS' if report.passed else 'FAIL'}] {name}", flush=True)

from fishdet.netdef import Convolutional, NetworkDef, parse_network_config
from fishdet.weights import WeightedNetwork, _conv_layer_plan, load_weights


def weights_blob(net_def: NetworkDef, fill=None, header=(0, 2, 0, 0)) -> bytes:
    """Serialize a weights byte stream for a definition, test-side.

    ``fill(layer_index, name, count)`` supplies each float block; the
    default is small deterministic values distinguishable per block.
    """
    major, minor, revision, seen = header
    out = struct.pack("<iii", major, minor, revision)
    out += struct.pack("<q" if major * 10 + minor >= 2 else "<i", seen)

    def default_fill(layer_idx, name, count):
        base = {"biases": 0.0, "scales": 1.0, "rolling_mean": 0.0,
                "rolling_variance": 1.0, "weights": 0.01}[name]
        return np.full(count, base, dtype=np.float32) + layer_idx * 1e-4

    fill = fill or default_fill
    for i, layer, in_c in _conv_layer_plan(net_def):
        n, k = layer.filters, layer.kernel_size
        blocks = [("biases", n)]
        if layer.batch_normalize:
            blocks += [("scales", n), ("rolling_mean", n), ("rolling_variance", n)]
        blocks.append(("weights", n * in_c * k * k))
        for name, count in blocks:
            arr = np.asarray(fill(i, name, count), dtype="<f4")
            assert arr.size == count
            out += arr.tobytes()
    return out


def net_from_cfg(cfg: str, fill=None) -> WeightedNetwork:
    net_def = parse_network_config(cfg)
    return load_weights(net_def, weights_blob(net_def, fill=fill))


SQUARENET_CFG = """\
[net]
width=64
height=64
channels=3

[convolutional]
filters=1
size=2
stride=2
activation=linear

[convolutional]
filters=1
size=2
stride=2
activation=linear

[convolutional]
filters=1
size=2
stride=2
activation=linear

[convolutional]
filters=1
size=2
stride=2
activation=linear

[convolutional]
filters=1
size=2
stride=2
activation=linear

[convolutional]
filters=18
size=1
stride=1
activation=linear

[yolo]
mask=0,1,2
anchors=16,16, 30,30, 60,60
classes=1
"""

# head channel layout per anchor block: tx ty tw th obj cls
_OBJ_GAIN, _OBJ_BIAS = 40.0, -5.0
_CLS_BIAS = 5.0


def _squarenet_fill(layer_idx, name, count):
    if name == "weights":
        if layer_idx == 0:
            return np.full(count, 1.0 / 12.0, dtype=np.float32)  # mean over 2x2x3
        if layer_idx < 5:
            return np.full(count, 0.25, dtype=np.float32)        # mean over 2x2
        w = np.zeros(count, dtype=np.float32)                    # head: 18 x 1 x 1 x 1
        w[4] = _OBJ_GAIN                                         # anchor 0 objectness
        return w
    if name == "biases" and layer_idx == 5:
        b = np.zeros(count, dtype=np.float32)
        for a in range(3):
            b[a * 6 + 4] = _OBJ_BIAS if a == 0 else -10.0
            b[a * 6 + 5] = _CLS_BIAS
        return b
    return np.zeros(count, dtype=np.float32)


@pytest.fixture(scope="session")
def squarenet() -> WeightedNetwork:
    """6-conv single-head detector that fires anchor 0 on any 2x2 grid
    cell whose mean brightness is high: detects planted bright squares."""
    return net_from_cfg(SQUARENET_CFG, fill=_squarenet_fill)


def plant_squares(cells: list[tuple[int, int]], size: int = 64) -> np.ndarray:
    """Black image with a bright 16x16 square centered in each named
    32px grid cell (col, row)."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    for col, row in cells:
        cx, cy = col * 32 + 16, row * 32 + 16
        img[cy - 8:cy + 8, cx - 8:cx + 8] = 255
    return img


def square_truths(cells: list[tuple[int, int]], size: int = 64):
    from fishdet.labels import GroundTruthBox
    return [
        GroundTruthBox(0, (c * 32 + 16) / size, (r * 32 + 16) / size, 16 / size, 16 / size)
        for c, r in cells
    ]
