"""Peek inside the network: capture feature maps from chosen layers,
render them with the viridis colormap and measure, via PCA, how much of
each layer's variance a few components explain.

Two regimes are diagnostic.  When one component explains nearly all the
variance, the layer's maps share a single pattern; when the ratios are
flat, each map carries distinct information.
"""

from pathlib import Path

import numpy as np

from _toynet import bright_square_frame, make_toy_detector

from fishdet import component_image, forward, letterbox_preprocess, pca, render, save_image, unpack
from fishdet.pca import FeatureMapSet, variance_report, variance_report_csv

out_dir = Path("demo_out/pca")
out_dir.mkdir(parents=True, exist_ok=True)

net = make_toy_detector()
frame = bright_square_frame([(0, 0), (1, 1)])
tensor, _ = letterbox_preprocess(frame, (64, 64))

# probe the first pooling stage and the 18-map head input (1-based numbers)
probe_layers = [1, 6]
_, probed = forward(net, tensor, probe=probe_layers)

results = {}
for layer_idx in probe_layers:
    maps = FeatureMapSet(layer_index=layer_idx, maps=probed[layer_idx], source_id="demo")
    print(f"layer {layer_idx}: {maps.n_maps} map(s) of "
          f"{maps.maps.shape[1]}x{maps.maps.shape[2]}")

    for j in range(min(maps.n_maps, 4)):
        save_image(out_dir / f"L{layer_idx:03d}_m{j:03d}.png", render(maps.maps[j]))

    matrix = unpack(maps)            # one row per map: N x (H*W)
    result = pca(matrix)
    results[layer_idx] = result
    ratios = ", ".join(f"{r:.3f}" for r in result.variance_ratios[:5])
    print(f"  top variance ratios: {ratios}")

    # rebuild images from the leading components
    for k in (1, 2):
        if k <= maps.n_maps:
            save_image(out_dir / f"L{layer_idx:03d}_pc{k}.png",
                       render(component_image(maps, result, k)))

report = variance_report(results, top_k=5)
(out_dir / "variance.csv").write_text(variance_report_csv(report))
print(f"\nrenders and variance.csv in {out_dir}/")

# a worked example of the unpacking rule: 32 maps of 13x13 -> 32 x 169
stack = FeatureMapSet(layer_index=0, maps=np.random.default_rng(0).normal(size=(32, 13, 13)))
print(f"unpacking 32 maps of 13x13 gives a matrix of {unpack(stack).shape}")
