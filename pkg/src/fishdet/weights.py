"""Binary weights reader for the de-facto darknet layout.

File layout: three little-endian int32 (major, minor, revision), then
the number of images seen during training as int64 when
major*10+minor >= 2 (int32 before that), then one flat little-endian
float32 stream consumed per convolutional layer in definition order:

    biases[filters]
    scales[filters], rolling_mean[filters], rolling_variance[filters]   (batch_normalize only)
    weights[filters * in_channels * k * k]                              (row-major)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteWeight, TrailingBytes, TruncatedFile
from .netdef import Convolutional, NetworkDef, layer_output_shapes

HEADER_FMT_OLD = "<iii i"
HEADER_FMT_NEW = "<iii q"


@dataclass
class WeightsHeader:
    major: int
    minor: int
    revision: int
    images_seen: int


@dataclass
class ConvParams:
    biases: np.ndarray
    weights: np.ndarray  # (filters, in_channels, k, k) float32
    scales: np.ndarray | None = None
    rolling_mean: np.ndarray | None = None
    rolling_variance: np.ndarray | None = None


@dataclass
class WeightedNetwork:
    definition: NetworkDef
    header: WeightsHeader
    params: dict[int, ConvParams] = field(default_factory=dict)  # keyed by 0-based layer index


def _conv_layer_plan(net_def: NetworkDef) -> list[tuple[int, Convolutional, int]]:
    """(layer index, layer, in_channels) for every convolutional layer."""
    shapes = layer_output_shapes(net_def)
    plan = []
    for i, layer in enumerate(net_def.layers):
        if isinstance(layer, Convolutional):
            in_c = shapes[i - 1][0] if i else net_def.net_params.channels
            plan.append((i, layer, in_c))
    return plan


def parameter_count(net_def: NetworkDef) -> int:
    """Total float32 count the weights stream must provide for this definition."""
    total = 0
    for _, layer, in_c in _conv_layer_plan(net_def):
        n = layer.filters
        total += n * (4 if layer.batch_normalize else 1)
        total += n * in_c * layer.kernel_size * layer.kernel_size
    return total


def zero_params(layer: Convolutional, in_c: int) -> ConvParams:
    """Placeholder parameters for layers beyond a partial weights file."""
    n, k = layer.filters, layer.kernel_size
    p = ConvParams(
        biases=np.zeros(n, dtype=np.float32),
        weights=np.zeros((n, in_c, k, k), dtype=np.float32),
    )
    if layer.batch_normalize:
        p.scales = np.ones(n, dtype=np.float32)
        p.rolling_mean = np.zeros(n, dtype=np.float32)
        p.rolling_variance = np.ones(n, dtype=np.float32)
    return p


def load_weights(net_def: NetworkDef, blob: bytes, allow_partial: bool = False) -> WeightedNetwork:
    """Bind a weights byte stream to a parsed definition.

    With ``allow_partial`` a file that stops at a layer boundary (a
    backbone-only checkpoint) is accepted; the remaining layers get zero
    kernels, zero biases and unit batch-norm statistics.  A file that
    stops mid-layer is truncated either way.
    """
    if len(blob) < 12:
        raise TruncatedFile(expected=3, actual=len(blob) // 4)
    major, minor, revision = struct.unpack_from("<iii", blob, 0)
    if major * 10 + minor >= 2:
        (seen,) = struct.unpack_from("<q", blob, 12)
        offset = 20
    else:
        (seen,) = struct.unpack_from("<i", blob, 12)
        offset = 16
    header = WeightsHeader(major, minor, revision, seen)

    body = blob[offset:]
    if len(body) % 4:
        raise TrailingBytes(len(body) % 4)
    floats = np.frombuffer(body, dtype="<f4")

    expected_total = parameter_count(net_def)
    net = WeightedNetwork(definition=net_def, header=header)
    pos = 0

    def take(n: int, layer_idx: int) -> np.ndarray:
        nonlocal pos
        chunk = floats[pos:pos + n]
        pos += n
        bad = np.flatnonzero(~np.isfinite(chunk))
        if bad.size:
            raise NonFiniteWeight(layer=layer_idx + 1, index=pos - n + int(bad[0]))
        return np.ascontiguousarray(chunk, dtype=np.float32)

    for i, layer, in_c in _conv_layer_plan(net_def):
        n, k = layer.filters, layer.kernel_size
        block = n * (4 if layer.batch_normalize else 1) + n * in_c * k * k
        if pos + block > floats.size:
            if allow_partial and pos == floats.size:
                net.params[i] = zero_params(layer, in_c)
                continue
            raise TruncatedFile(expected=expected_total, actual=floats.size)
        p = ConvParams(biases=take(n, i), weights=None)
        if layer.batch_normalize:
            p.scales = take(n, i)
            p.rolling_mean = take(n, i)
            p.rolling_variance = take(n, i)
        p.weights = take(n * in_c * k * k, i).reshape(n, in_c, k, k)
        net.params[i] = p

    if pos < floats.size:
        raise TrailingBytes((floats.size - pos) * 4)
    return net


def load_weights_file(net_def: NetworkDef, path, allow_partial: bool = False) -> WeightedNetwork:
    with open(path, "rb") as fh:
        return load_weights(net_def, fh.read(), allow_partial=allow_partial)
