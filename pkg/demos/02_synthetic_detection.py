"""End-to-end detection on synthetic frames with a hand-weighted net.

The toy detector pools brightness down to a 2x2 grid and raises the
objectness logit of its first anchor wherever a bright square sits, so
every step of the pipeline (letterbox, forward, decode, threshold, NMS,
coordinate mapping) can be followed by eye.
"""

from pathlib import Path

from _toynet import bright_square_frame, make_toy_detector

from fishdet import detect_image, draw_detections, save_image
from fishdet.boxes import format_detections

out_dir = Path("demo_out/detection")
out_dir.mkdir(parents=True, exist_ok=True)

net = make_toy_detector()

scenes = {
    "one_square": [(0, 0)],
    "two_squares": [(0, 1), (1, 0)],
    "background": [],
}

for name, cells in scenes.items():
    frame = bright_square_frame(cells)
    dets = detect_image(net, frame, conf_threshold=0.25, nms_threshold=0.45)

    print(f"{name}: {len(dets)} detection(s)")
    print(format_detections(dets), end="")

    save_image(out_dir / f"{name}.ppm", frame)
    save_image(out_dir / f"{name}_det.ppm", draw_detections(frame, dets))

print(f"\nannotated frames in {out_dir}/")
print("boxes land exactly on the planted squares: centers at cell")
print("centers, sizes equal to the first anchor (16x16).")
