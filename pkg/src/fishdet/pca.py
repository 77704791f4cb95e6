"""Principal component analysis over the feature maps of one layer.

Each feature map is treated as one variable and its pixels as the
samples: N maps of H x W unpack row-major into an N x (H*W) matrix, so
32 maps of 13 x 13 become 32 x 169.  The covariance is taken over the
N-dimensional variable space.  Two regimes are diagnostic: a first
component explaining all the variance means the maps share one pattern;
near-equal ratios mean the maps are all distinct.

All computation here is float64 for eigensolver conditioning, even
though the engine itself runs float32.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMatrix, InconsistentDims, IndexOutOfRange


@dataclass
class FeatureMapSet:
    layer_index: int  # 1-based, the numbering reports use
    maps: np.ndarray  # (N, H, W)
    source_id: str = ""

    @property
    def n_maps(self) -> int:
        return self.maps.shape[0]


@dataclass
class PcaResult:
    eigenvalues: np.ndarray      # (N,), descending, clamped at 0
    eigenvectors: np.ndarray     # (N, N), row k is component k, orthonormal
    variance_ratios: np.ndarray  # (N,), sums to 1 unless degenerate
    mean: np.ndarray             # (N,), per-variable mean removed before analysis
    degenerate: bool = False     # total variance was 0; ratios fixed to (1, 0, ...)


def unpack(maps: FeatureMapSet) -> np.ndarray:
    """Row-major flattening of each map into one row of the data matrix."""
    if maps.maps.ndim != 3 or maps.maps.shape[0] < 1:
        raise InconsistentDims(f"need (N, H, W) maps, got {maps.maps.shape}")
    n, h, w = maps.maps.shape
    return maps.maps.reshape(n, h * w).astype(np.float64)


def pca(matrix: np.ndarray) -> PcaResult:
    """Mean-center rows, eigendecompose the variable-space covariance.

    Eigenpairs come back sorted by descending eigenvalue with a
    deterministic sign: the largest-magnitude entry of each eigenvector
    is positive.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1:
        raise InconsistentDims(f"need a 2-D matrix, got shape {m.shape}")
    n, cols = m.shape
    if cols < 2:
        raise DegenerateMatrix(f"{cols} column(s); covariance needs at least 2 samples")

    mean = m.mean(axis=1)
    centered = m - mean[:, None]
    cov = centered @ centered.T / (cols - 1)
    eigenvalues, vectors = np.linalg.eigh(cov)  # ascending
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    vectors = vectors[:, order].T  # rows are components

    # deterministic sign convention
    for k in range(n):
        j = np.argmax(np.abs(vectors[k]))
        if vectors[k, j] < 0:
            vectors[k] = -vectors[k]

    total = eigenvalues.sum()
    if total > 0:
        ratios = eigenvalues / total
        degenerate = False
    else:
        ratios = np.zeros(n)
        ratios[0] = 1.0
        degenerate = True
    return PcaResult(eigenvalues=eigenvalues, eigenvectors=vectors,
                     variance_ratios=ratios, mean=mean, degenerate=degenerate)


def component_image(maps: FeatureMapSet, result: PcaResult, k: int) -> np.ndarray:
    """Project the mean-centered maps onto component k (1-based) as an H x W raster."""
    n, h, w = maps.maps.shape
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"component {k} outside 1..{n}")
    centered = unpack(maps) - result.mean[:, None]
    return (result.eigenvectors[k - 1] @ centered).reshape(h, w)


def variance_report(results: dict[int, PcaResult], top_k: int = 5) -> dict:
    """Top-k variance ratios per layer, ready for CSV and bar plots.

    Layers with fewer than ``top_k`` components pad with zeros, mirroring
    an all-in-one-component bar chart.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    layers = []
    for layer_idx in sorted(results):
        r = results[layer_idx]
        ratios = list(r.variance_ratios[:top_k])
        ratios += [0.0] * (top_k - len(ratios))
        layers.append({
            "layer": layer_idx,
            "n_maps": int(r.eigenvalues.size),
            "ratios": [float(v) for v in ratios],
            "degenerate": r.degenerate,
        })
    return {"top_k": top_k, "layers": layers}


def variance_report_csv(report: dict) -> str:
    top_k = report["top_k"]
    header = "layer,n_maps," + ",".join(f"r{i + 1}" for i in range(top_k))
    rows = [header]
    for entry in report["layers"]:
        rows.append(f"{entry['layer']},{entry['n_maps']}," +
                    ",".join(f"{v:.6f}" for v in entry["ratios"]))
    return "\n".join(rows) + "\n"
