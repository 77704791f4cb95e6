"""The semi-supervised loop, mechanized: detect over a directory,
retain boxes scoring at least 0.25 as provisional labels, then hand the
manifest to the review service for human correction.

Retraining on the corrected labels happens in an external trainer; this
toolkit produces and consumes the label files on either side of it.
"""

from pathlib import Path

from _toynet import bright_square_frame, make_toy_detector

from fishdet import evaluate_dataset, pseudo_label, save_image, split_dataset

data_dir = Path("demo_out/unlabeled")
data_dir.mkdir(parents=True, exist_ok=True)

# an "unlabeled" directory of synthetic frames, some background-only
layouts = [[(0, 0)], [(1, 0)], [(0, 1), (1, 1)], [], [(1, 1)],
           [(0, 0), (1, 0)], [], [(0, 1)]]
for i, cells in enumerate(layouts):
    save_image(data_dir / f"frame_{i:03d}.ppm", bright_square_frame(cells))

net = make_toy_detector()

manifest = pseudo_label(net, data_dir, conf_threshold=0.25)
s = manifest.summary
print(f"pseudo-labeled {s['images']} images, {s['boxes']} boxes retained at >= 0.25")
print(f"score histogram (10 bins): {s['score_histogram']}")

# sanity: the model agrees perfectly with labels it wrote itself
report = evaluate_dataset(net, manifest, conf_threshold=0.25)
print(f"self-consistency: precision={report.precision:.1f} recall={report.recall:.1f}")

# the familiar 90-10 split for the eventual retraining round
manifest = split_dataset(manifest.entries, test_fraction=0.1, seed=42)
n_test = sum(e.split == "test" for e in manifest.entries)
print(f"split: {len(manifest.entries) - n_test} train / {n_test} test")

manifest_path = data_dir / "manifest.json"
manifest.save(manifest_path)
print(f"manifest: {manifest_path}")
print()
print("next, review and correct the provisional boxes in a browser:")
print(f"  fishdet serve --manifest {manifest_path} --port 8000")
