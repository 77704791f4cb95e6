"""Forward-pass execution of a weighted network on the CPU.

Tensors are dense float32 arrays of shape (channels, height, width).
Convolutions run as im2col + GEMM over fixed-size row blocks; the block
decomposition depends only on the output height, never on the worker
count, so results are bitwise identical for any parallelism degree.
A direct-loop reference lives in the test suite as the oracle.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Mapping

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import (
    ChannelMismatch,
    FishdetError,
    NonFiniteActivation,
    ShapeMismatch,
)
from .netdef import (
    LEAKY_SLOPE,
    Convolutional,
    NetworkDef,
    Route,
    Shortcut,
    Upsample,
    YoloHead,
)
from .weights import ConvParams, WeightedNetwork

BN_EPS = 1e-6
_ROW_BLOCK = 32  # output rows per GEMM block; fixed for reproducibility


def conv2d(x: np.ndarray, weights: np.ndarray, stride: int = 1, padding: int = 0,
           workers: int = 1) -> np.ndarray:
    """Raw cross-correlation (no bias, no activation).

    ``weights`` is (filters, in_channels, k, k).  The operator is linear
    in ``x``; bias/normalization/activation are layered on top by
    :func:`conv_forward`.
    """
    c, h, w = x.shape
    f, in_c, k, _ = weights.shape
    if in_c != c:
        raise ChannelMismatch(f"input has {c} channels, kernels expect {in_c}")

    if padding:
        padded = np.zeros((c, h + 2 * padding, w + 2 * padding), dtype=np.float32)
        padded[:, padding:padding + h, padding:padding + w] = x
    else:
        padded = np.ascontiguousarray(x, dtype=np.float32)

    out_h = (h + 2 * padding - k) // stride + 1
    out_w = (w + 2 * padding - k) // stride + 1
    sc, sh, sw = padded.strides
    windows = as_strided(
        padded,
        shape=(c, k, k, out_h, out_w),
        strides=(sc, sh, sw, sh * stride, sw * stride),
        writeable=False,
    )
    kernel_mat = weights.reshape(f, c * k * k).astype(np.float32, copy=False)
    out = np.empty((f, out_h, out_w), dtype=np.float32)

    blocks = [(r, min(r + _ROW_BLOCK, out_h)) for r in range(0, out_h, _ROW_BLOCK)]

    def run_block(block):
        r0, r1 = block
        cols = windows[:, :, :, r0:r1, :].reshape(c * k * k, (r1 - r0) * out_w)
        out[:, r0:r1, :] = (kernel_mat @ cols).reshape(f, r1 - r0, out_w)

    if workers <= 1 or len(blocks) == 1:
        for b in blocks:
            run_block(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))
    return out


def conv_forward(x: np.ndarray, layer: Convolutional, params: ConvParams,
                 workers: int = 1, layer_index: int | None = None) -> np.ndarray:
    """Convolution -> batch-norm or bias -> activation."""
    out = conv2d(x, params.weights, stride=layer.stride, padding=layer.padding,
                 workers=workers)
    if layer.batch_normalize:
        inv = (params.scales / np.sqrt(params.rolling_variance + BN_EPS)).astype(np.float32)
        shift = (params.biases - params.rolling_mean * inv).astype(np.float32)
        out *= inv[:, None, None]
        out += shift[:, None, None]
    else:
        out += params.biases[:, None, None]

    if layer.activation == "leaky":
        out = np.where(out > 0, out, np.float32(LEAKY_SLOPE) * out)
    elif layer.activation != "linear":
        raise ValueError(f"unsupported activation {layer.activation!r}")

    if not np.isfinite(out).all():
        raise NonFiniteActivation(layer=(layer_index + 1) if layer_index is not None else -1)
    return out


def fold_batchnorm(layer: Convolutional, params: ConvParams) -> ConvParams:
    """Fold batch-norm statistics into kernel weights and biases.

    The folded layer run without batch-norm matches the unfolded
    pipeline to float32 rounding.
    """
    if not layer.batch_normalize:
        return params
    inv = (params.scales / np.sqrt(params.rolling_variance + BN_EPS)).astype(np.float32)
    return ConvParams(
        biases=(params.biases - params.rolling_mean * inv).astype(np.float32),
        weights=(params.weights * inv[:, None, None, None]).astype(np.float32),
    )


def shortcut_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise residual sum (linear activation)."""
    if a.shape != b.shape:
        raise ShapeMismatch(f"shortcut operands {a.shape} vs {b.shape}")
    return a + b


def route_concat(tensors: list[np.ndarray]) -> np.ndarray:
    """Channel-axis concatenation in argument order."""
    hw = {t.shape[1:] for t in tensors}
    if len(hw) > 1:
        raise ShapeMismatch(f"route inputs differ spatially: {sorted(hw)}")
    if len(tensors) == 1:
        return tensors[0]
    return np.concatenate(tensors, axis=0)


def upsample_nearest(x: np.ndarray, factor: int = 2) -> np.ndarray:
    """Each value replicated into a factor x factor block."""
    return np.repeat(np.repeat(x, factor, axis=1), factor, axis=2)


def upsample2x(x: np.ndarray) -> np.ndarray:
    return upsample_nearest(x, 2)


def _last_uses(net_def: NetworkDef) -> list[int]:
    """For each layer, the index of the last layer consuming its output."""
    last = list(range(len(net_def.layers)))
    for i, layer in enumerate(net_def.layers):
        deps = [i - 1]
        if isinstance(layer, Shortcut):
            deps.append(layer.from_index)
        elif isinstance(layer, Route):
            deps = list(layer.layers)
        for d in deps:
            if d >= 0:
                last[d] = max(last[d], i)
    return last


def forward(net: WeightedNetwork, x: np.ndarray,
            probe: Iterable[int] = (), workers: int = 1,
            ) -> tuple[list[np.ndarray], dict[int, np.ndarray]]:
    """Run the network on one preprocessed input tensor.

    Returns the raw pre-decode head tensors in network order, plus a
    copy of the output of every probed layer.  ``probe`` uses 1-based
    layer numbers (the convention of reports and figures); probing layer
    1 of the stock network yields its 32-map first feature extraction.

    Outputs are freed as soon as no later layer needs them, so a full
    416x416 pass stays within a few hundred MB.
    """
    net_def = net.definition
    p = net_def.net_params
    if x.shape != (p.channels, p.height, p.width):
        raise ShapeMismatch(
            f"input {x.shape} does not match network input "
            f"({p.channels}, {p.height}, {p.width})")

    probe_internal = {q - 1 for q in probe}
    bad = [q + 1 for q in probe_internal if not 0 <= q < len(net_def.layers)]
    if bad:
        raise IndexError(f"probe layers out of range: {sorted(bad)}")

    last = _last_uses(net_def)
    outputs: dict[int, np.ndarray] = {}
    heads: list[np.ndarray] = []
    probed: dict[int, np.ndarray] = {}
    prev = np.ascontiguousarray(x, dtype=np.float32)

    for i, layer in enumerate(net_def.layers):
        try:
            if isinstance(layer, Convolutional):
                out = conv_forward(prev, layer, net.params[i], workers=workers, layer_index=i)
            elif isinstance(layer, Shortcut):
                out = shortcut_add(prev, outputs[layer.from_index])
            elif isinstance(layer, Route):
                out = route_concat([outputs[j] for j in layer.layers])
            elif isinstance(layer, Upsample):
                out = upsample_nearest(prev, layer.stride)
            elif isinstance(layer, YoloHead):
                out = prev  # raw logits pass through; decoding is a separate stage
                heads.append(prev.copy())
        except FishdetError as exc:
            if not isinstance(exc, NonFiniteActivation):  # already names its layer
                exc.args = (f"layer {i + 1}: {exc}",)
            raise

        outputs[i] = out
        if i in probe_internal:
            probed[i + 1] = out.copy()
        prev = out
        # drop tensors no later layer references
        for j in [j for j, t in outputs.items() if last[j] <= i and j != i]:
            del outputs[j]

    return heads, probed
