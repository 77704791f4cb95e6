"""Walk the bundled single-class network definition.

The definition format is plain text sections; parsing it yields 107
layers with three detection heads.  An input of 416x416 shrinks by a
factor of 32 at the first head, giving 13x13, then 26x26 and 52x52 at
the two upsampled heads.
"""

from fishdet import load_bundled_config, validate_head_filters
from fishdet.netdef import Convolutional, Route, Shortcut, Upsample, YoloHead, layer_output_shapes

net_def = load_bundled_config()
shapes = layer_output_shapes(net_def)

print(f"layers: {len(net_def.layers)}")
print(f"input:  {net_def.net_params.channels} x {net_def.net_params.height}"
      f" x {net_def.net_params.width}")
print()

# layer-by-layer table, numbered from 1 as in reports
for i, layer in enumerate(net_def.layers):
    c, h, w = shapes[i]
    kind = type(layer).__name__.lower()
    detail = ""
    if isinstance(layer, Convolutional):
        detail = f"{layer.filters} filters {layer.kernel_size}x{layer.kernel_size}/{layer.stride}"
        if layer.batch_normalize:
            detail += " +bn"
    elif isinstance(layer, Shortcut):
        detail = f"from layer {layer.from_index + 1}"
    elif isinstance(layer, Route):
        detail = "concat " + ",".join(str(j + 1) for j in layer.layers)
    elif isinstance(layer, Upsample):
        detail = f"x{layer.stride}"
    elif isinstance(layer, YoloHead):
        detail = f"anchors {[layer.anchors[m] for m in layer.mask]}"
    marker = " <- detection" if isinstance(layer, YoloHead) else ""
    print(f"{i + 1:4d} {kind:14s} {detail:40s} -> {c:4d} x {h:3d} x {w:3d}{marker}")

print()
print("head grids:", [shapes[i][1] for i in net_def.head_indices])
print("raw boxes per image:", sum(3 * shapes[i][1] * shapes[i][2]
                                  for i in net_def.head_indices))

# every head conv must carry (classes + 5) * 3 filters
classes = net_def.layers[net_def.head_indices[0]].classes
print(f"classes: {classes}; required head filters: {(classes + 5) * 3}")
print("nonconforming head convs:", validate_head_filters(net_def, classes) or "none")
