"""Command-line entry points: detect, eval, probe, pseudolabel, serve.

Model and file errors exit with code 2 and a message naming the path.
Set FISHDET_LOG=DEBUG|INFO|WARNING to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .boxes import DEFAULT_CONF_THRESHOLD, DEFAULT_NMS_THRESHOLD, detect_image, format_detections
from .dataset import DatasetManifest, evaluate_dataset, find_images, pseudo_label
from .engine import forward
from .errors import FishdetError
from .image import letterbox_preprocess, load_image, save_image
from .netdef import parse_network_config
from .pca import FeatureMapSet, component_image, pca, unpack, variance_report, variance_report_csv
from .render import draw_detections, render
from .weights import load_weights_file


def _load_model(args):
    cfg_path = Path(args.config)
    weights_path = Path(args.weights)
    if not cfg_path.is_file():
        raise FileNotFoundError(f"config not found: {cfg_path}")
    if not weights_path.is_file():
        raise FileNotFoundError(f"weights not found: {weights_path}")
    net_def = parse_network_config(cfg_path.read_text())
    return load_weights_file(net_def, weights_path, allow_partial=args.partial_weights)


def _image_list(path: Path) -> list[Path]:
    if path.is_dir():
        return find_images(path)
    return [path]


def cmd_detect(args) -> int:
    net = _load_model(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for img_path in _image_list(Path(args.image)):
        raster = load_image(img_path)
        dets = detect_image(net, raster, args.conf, args.nms, workers=args.workers)
        save_image(out_dir / f"{img_path.stem}_det{img_path.suffix}",
                   draw_detections(raster, dets))
        (out_dir / f"{img_path.stem}.txt").write_text(format_detections(dets))
        print(f"{img_path}: {len(dets)} detection(s)")
    return 0


def cmd_eval(args) -> int:
    net = _load_model(args)
    manifest = DatasetManifest.load(args.manifest)
    report = evaluate_dataset(net, manifest, iou_threshold=args.iou,
                              conf_threshold=args.conf, nms_threshold=args.nms,
                              workers=args.workers, split=args.split)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json())
    (out_dir / "report.txt").write_text(report.to_text())
    (out_dir / "pr_curve.csv").write_text(report.curve_csv())
    print(report.to_text(), end="")
    return 0


def cmd_probe(args) -> int:
    net = _load_model(args)
    layers = sorted({int(v) for v in args.layers.split(",")})
    raster = load_image(args.image)
    p = net.definition.net_params
    tensor, _ = letterbox_preprocess(raster, (p.width, p.height))
    _, probed = forward(net, tensor, probe=layers, workers=args.workers)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = {}
    for layer_idx in layers:
        maps = FeatureMapSet(layer_index=layer_idx, maps=probed[layer_idx],
                             source_id=str(args.image))
        n_render = maps.n_maps if args.all_maps else min(maps.n_maps, args.max_maps)
        for j in range(n_render):
            save_image(out_dir / f"L{layer_idx:03d}_m{j:03d}.png", render(maps.maps[j]))
        result = pca(unpack(maps))
        results[layer_idx] = result
        for k in (1, 2):
            if k <= maps.n_maps:
                save_image(out_dir / f"L{layer_idx:03d}_pc{k}.png",
                           render(component_image(maps, result, k)))
    report = variance_report(results, top_k=args.components)
    (out_dir / "variance.json").write_text(json.dumps(report, indent=2))
    (out_dir / "variance.csv").write_text(variance_report_csv(report))
    print(f"probed layers {layers} -> {out_dir}")
    return 0


def cmd_pseudolabel(args) -> int:
    net = _load_model(args)
    manifest = pseudo_label(net, args.dir, conf_threshold=args.conf,
                            nms_threshold=args.nms, workers=args.workers)
    manifest_path = Path(args.manifest or (Path(args.dir) / "manifest.json"))
    manifest.save(manifest_path)
    s = manifest.summary
    print(f"labeled {s['images']} image(s), {s['boxes']} box(es) -> {manifest_path}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve
    static = args.static
    if static is None and Path("frontend/dist").is_dir():
        static = "frontend/dist"
    serve(args.manifest, port=args.port, image_root=args.image_root,
          static_dir=static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fishdet")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p):
        p.add_argument("--config", required=True, help="network definition file")
        p.add_argument("--weights", required=True, help="binary weights file")
        p.add_argument("--partial-weights", action="store_true",
                       help="accept a backbone-only weights file")
        p.add_argument("--conf", type=float, default=DEFAULT_CONF_THRESHOLD)
        p.add_argument("--nms", type=float, default=DEFAULT_NMS_THRESHOLD)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("detect", help="detect objects, write annotated copies + box files")
    model_flags(p)
    p.add_argument("--image", required=True, help="image file or directory")
    p.add_argument("--out", default="detections")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="evaluate a labeled manifest")
    model_flags(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--split", default=None, choices=[None, "train", "test"])
    p.add_argument("--out", default="eval")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("probe", help="render feature maps and analyze their variance")
    model_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--layers", required=True, help="comma list of 1-based layer numbers")
    p.add_argument("--components", type=int, default=5)
    p.add_argument("--max-maps", type=int, default=16, help="renders per layer")
    p.add_argument("--all-maps", action="store_true")
    p.add_argument("--out", default="probe")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("pseudolabel", help="write provisional labels for a directory")
    model_flags(p)
    p.add_argument("--dir", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_pseudolabel)

    p = sub.add_parser("serve", help="run the label review service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--image-root", default=None)
    p.add_argument("--static", default=None, help="directory of review UI assets")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("FISHDET_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FishdetError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
