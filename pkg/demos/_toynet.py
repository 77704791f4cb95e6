"""Tiny hand-weighted detector shared by the demo scripts.

Five 2x2 mean-pooling convolutions reduce a 64x64 frame to a 2x2 grid
of regional brightness; a final 1x1 head turns brightness into an
objectness logit for the first anchor.  The result is a fully working
single-head network whose behavior is predictable by hand: it "detects"
any grid cell containing a bright 16x16 square.
"""

import struct

import numpy as np

from fishdet import load_weights, parse_network_config

TOY_CFG = """\
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


def toy_weights_bytes() -> bytes:
    """Weights stream: header, then per-conv biases + kernels."""
    out = struct.pack("<iiiq", 0, 2, 0, 0)

    def emit(arr):
        nonlocal out
        out += np.asarray(arr, dtype="<f4").tobytes()

    emit(np.zeros(1))              # conv 1 bias
    emit(np.full(12, 1.0 / 12.0))  # conv 1: mean over a 2x2x3 block
    for _ in range(4):
        emit(np.zeros(1))          # bias
        emit(np.full(4, 0.25))     # mean over a 2x2 block

    # head: 18 channels = 3 anchors x (tx ty tw th obj cls)
    biases = np.zeros(18)
    weights = np.zeros(18)
    biases[4], weights[4] = -5.0, 40.0   # anchor 0 objectness: fires near brightness 0.25
    biases[10] = biases[16] = -10.0      # anchors 1, 2 stay silent
    biases[5] = biases[11] = biases[17] = 5.0  # class probability given an object
    emit(biases)
    emit(weights)
    return out


def make_toy_detector():
    return load_weights(parse_network_config(TOY_CFG), toy_weights_bytes())


def bright_square_frame(cells, size=64):
    """Black frame with a bright 16x16 square centered in each 32px cell."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    for col, row in cells:
        cx, cy = col * 32 + 16, row * 32 + 16
        img[cy - 8:cy + 8, cx - 8:cx + 8] = 255
    return img
