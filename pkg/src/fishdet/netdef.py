"""Parser and validator for darknet-style network definition files.

The format is plain text: `[section]` headers followed by `key=value`
lines, `#` starting a comment.  The first section must be `[net]` and
holds input dimensions plus training hyperparameters that inference
ignores but preserves.  Every later section is one layer.

Layer indices are 0-based internally.  User-facing output (probe
requests, error messages, reports) numbers layers from 1, so the three
detection heads of the stock single-class network sit at 82, 94 and 106.
Absolute indices written inside `route`/`shortcut` sections keep the
0-based convention of the file format itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources

from .errors import (
    DanglingLayerReference,
    DegenerateClassCount,
    HeadFilterMismatch,
    MissingRequiredKey,
    ShapeMismatch,
    UnknownSection,
)

log = logging.getLogger(__name__)

LEAKY_SLOPE = 0.1


@dataclass
class NetParams:
    width: int
    height: int
    channels: int
    batch: int = 1
    subdivisions: int = 1
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class Convolutional:
    filters: int
    kernel_size: int
    stride: int = 1
    pad: bool = False
    batch_normalize: bool = False
    activation: str = "linear"

    @property
    def padding(self) -> int:
        return self.kernel_size // 2 if self.pad else 0


@dataclass
class Shortcut:
    from_index: int  # resolved absolute 0-based layer index


@dataclass
class Route:
    layers: list[int]  # resolved absolute 0-based layer indices


@dataclass
class Upsample:
    stride: int = 2


@dataclass
class YoloHead:
    mask: list[int]
    anchors: list[tuple[float, float]]
    classes: int


LayerDef = Convolutional | Shortcut | Route | Upsample | YoloHead


@dataclass
class NetworkDef:
    net_params: NetParams
    layers: list[LayerDef]

    @property
    def head_indices(self) -> list[int]:
        return [i for i, l in enumerate(self.layers) if isinstance(l, YoloHead)]


_KNOWN_SECTIONS = {"net", "convolutional", "shortcut", "route", "upsample", "yolo"}

# keys inference consumes, plus recognized training-time keys it may
# silently skip; anything else warns
_USED_KEYS = {
    "net": {"width", "height", "channels", "batch", "subdivisions"},
    "convolutional": {"filters", "size", "stride", "pad", "batch_normalize", "activation"},
    "shortcut": {"from", "activation"},
    "route": {"layers"},
    "upsample": {"stride"},
    "yolo": {"mask", "anchors", "classes",
             "num", "jitter", "ignore_thresh", "truth_thresh", "random"},
}


def _split_sections(text: str) -> list[tuple[str, dict[str, str]]]:
    sections: list[tuple[str, dict[str, str]]] = []
    current: dict[str, str] | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip()
            current = {}
            sections.append((name, current))
        else:
            if current is None:
                raise UnknownSection("key=value before any [section]", section=0)
            if "=" not in line:
                raise UnknownSection(f"not a key=value line: {line!r}", section=len(sections) - 1)
            key, value = line.split("=", 1)
            current[key.strip()] = value.strip()
    return sections


def _require(sec: dict[str, str], key: str, index: int) -> str:
    if key not in sec:
        raise MissingRequiredKey(f"missing key", section=index, key=key)
    return sec[key]


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip() != ""]


def _warn_unknown(name: str, sec: dict[str, str], index: int) -> None:
    unknown = set(sec) - _USED_KEYS[name]
    if unknown:
        log.warning("section %d [%s]: ignoring keys %s", index, name, sorted(unknown))


def parse_network_config(text: str) -> NetworkDef:
    """Parse a network definition and validate its layer graph.

    Defaults follow the file convention the published weights were
    trained under: stride=1, batch_normalize=0, activation=linear,
    pad absent means no padding, pad=1 means kernel_size//2.
    """
    sections = _split_sections(text)
    if not sections or sections[0][0] != "net":
        raise UnknownSection("first section must be [net]", section=0)

    net_sec = sections[0][1]
    extra = {k: v for k, v in net_sec.items() if k not in _USED_KEYS["net"]}
    net = NetParams(
        width=int(_require(net_sec, "width", 0)),
        height=int(_require(net_sec, "height", 0)),
        channels=int(_require(net_sec, "channels", 0)),
        batch=int(net_sec.get("batch", 1)),
        subdivisions=int(net_sec.get("subdivisions", 1)),
        extra=extra,
    )

    layers: list[LayerDef] = []
    for pos, (name, sec) in enumerate(sections[1:]):
        idx = len(layers)  # 0-based index of the layer being built
        user_idx = idx + 1  # in error messages
        if name not in _KNOWN_SECTIONS or name == "net":
            raise UnknownSection(f"unknown section [{name}]", section=user_idx)
        _warn_unknown(name, sec, user_idx)

        if name == "convolutional":
            layers.append(Convolutional(
                filters=int(_require(sec, "filters", user_idx)),
                kernel_size=int(_require(sec, "size", user_idx)),
                stride=int(sec.get("stride", 1)),
                pad=bool(int(sec.get("pad", 0))),
                batch_normalize=bool(int(sec.get("batch_normalize", 0))),
                activation=sec.get("activation", "linear"),
            ))
        elif name == "shortcut":
            rel = int(_require(sec, "from", user_idx))
            layers.append(Shortcut(from_index=_resolve(rel, idx, user_idx, "from")))
        elif name == "route":
            refs = _int_list(_require(sec, "layers", user_idx))
            if not refs:
                raise MissingRequiredKey("empty layer list", section=user_idx, key="layers")
            layers.append(Route(layers=[_resolve(r, idx, user_idx, "layers") for r in refs]))
        elif name == "upsample":
            layers.append(Upsample(stride=int(sec.get("stride", 2))))
        elif name == "yolo":
            classes = int(_require(sec, "classes", user_idx))
            if classes <= 0:
                raise DegenerateClassCount(
                    f"classes={classes} is degenerate", section=user_idx, key="classes")
            flat = [float(v) for v in _require(sec, "anchors", user_idx).split(",")]
            if len(flat) % 2:
                raise MissingRequiredKey(
                    "anchors must be (w,h) pairs", section=user_idx, key="anchors")
            anchors = list(zip(flat[::2], flat[1::2]))
            mask = _int_list(_require(sec, "mask", user_idx))
            for m in mask:
                if not 0 <= m < len(anchors):
                    raise DanglingLayerReference(
                        f"mask index {m} outside anchor list", section=user_idx, key="mask")
            layers.append(YoloHead(mask=mask, anchors=anchors, classes=classes))

    net_def = NetworkDef(net_params=net, layers=layers)
    _validate_shapes(net_def)
    return net_def


def _resolve(ref: int, at: int, user_idx: int, key: str) -> int:
    """Resolve a relative (negative) or absolute 0-based layer reference."""
    abs_idx = at + ref if ref < 0 else ref
    if not 0 <= abs_idx < at:
        raise DanglingLayerReference(
            f"reference {ref} resolves to layer {abs_idx}, not an earlier layer",
            section=user_idx, key=key)
    return abs_idx


def layer_output_shapes(net_def: NetworkDef) -> list[tuple[int, int, int]]:
    """Static (channels, height, width) of every layer's output."""
    shapes: list[tuple[int, int, int]] = []
    c, h, w = net_def.net_params.channels, net_def.net_params.height, net_def.net_params.width
    for i, layer in enumerate(net_def.layers):
        if isinstance(layer, Convolutional):
            in_c, in_h, in_w = shapes[i - 1] if i else (c, h, w)
            k, s, p = layer.kernel_size, layer.stride, layer.padding
            out = (layer.filters, (in_h + 2 * p - k) // s + 1, (in_w + 2 * p - k) // s + 1)
        elif isinstance(layer, Shortcut):
            out = shapes[i - 1]
        elif isinstance(layer, Route):
            parts = [shapes[j] for j in layer.layers]
            out = (sum(p[0] for p in parts), parts[0][1], parts[0][2])
        elif isinstance(layer, Upsample):
            in_c, in_h, in_w = shapes[i - 1]
            out = (in_c, in_h * layer.stride, in_w * layer.stride)
        else:  # YoloHead passes its input through; decoding happens later
            out = shapes[i - 1]
        shapes.append(out)
    return shapes


def _validate_shapes(net_def: NetworkDef) -> None:
    shapes = layer_output_shapes(net_def)
    heads = 0
    for i, layer in enumerate(net_def.layers):
        user_idx = i + 1
        if isinstance(layer, Shortcut):
            if shapes[i - 1] != shapes[layer.from_index]:
                raise ShapeMismatch(
                    f"shortcut at section {user_idx}: operands {shapes[i - 1]} vs "
                    f"{shapes[layer.from_index]} (layer {layer.from_index + 1})")
        elif isinstance(layer, Route):
            hw = {shapes[j][1:] for j in layer.layers}
            if len(hw) > 1:
                raise ShapeMismatch(
                    f"route at section {user_idx}: spatial dims differ across inputs {sorted(hw)}")
        elif isinstance(layer, YoloHead):
            heads += 1
            prev = net_def.layers[i - 1] if i else None
            expected = (layer.classes + 5) * 3
            if not isinstance(prev, Convolutional):
                raise HeadFilterMismatch(
                    "detection head must follow a convolutional layer", section=user_idx)
            if prev.filters != expected:
                raise HeadFilterMismatch(
                    f"head conv has {prev.filters} filters, needs (C+5)*3 = {expected}",
                    section=user_idx, key="filters")
            if prev.activation != "linear" or prev.batch_normalize:
                raise HeadFilterMismatch(
                    "head conv must be linear and not batch-normalized", section=user_idx)


def validate_head_filters(net_def: NetworkDef, classes: int) -> list[tuple[int, int, int]]:
    """Report (0-based layer index, expected, actual) for every nonconforming head conv."""
    if classes <= 0:
        raise DegenerateClassCount(f"classes={classes} is degenerate")
    expected = (classes + 5) * 3
    bad = []
    for i in net_def.head_indices:
        prev = net_def.layers[i - 1]
        if isinstance(prev, Convolutional) and prev.filters != expected:
            bad.append((i - 1, expected, prev.filters))
    return bad


def serialize_network_config(net_def: NetworkDef) -> str:
    """Canonical text form; parse(serialize(parse(x))) == parse(x)."""
    out = ["[net]"]
    p = net_def.net_params
    out += [f"width={p.width}", f"height={p.height}", f"channels={p.channels}",
            f"batch={p.batch}", f"subdivisions={p.subdivisions}"]
    out += [f"{k}={v}" for k, v in sorted(p.extra.items())]
    for layer in net_def.layers:
        out.append("")
        if isinstance(layer, Convolutional):
            out.append("[convolutional]")
            if layer.batch_normalize:
                out.append("batch_normalize=1")
            out += [f"filters={layer.filters}", f"size={layer.kernel_size}",
                    f"stride={layer.stride}", f"pad={int(layer.pad)}",
                    f"activation={layer.activation}"]
        elif isinstance(layer, Shortcut):
            out += ["[shortcut]", f"from={layer.from_index}"]
        elif isinstance(layer, Route):
            out += ["[route]", "layers=" + ",".join(str(j) for j in layer.layers)]
        elif isinstance(layer, Upsample):
            out += ["[upsample]", f"stride={layer.stride}"]
        elif isinstance(layer, YoloHead):
            out.append("[yolo]")
            out.append("mask=" + ",".join(str(m) for m in layer.mask))
            flat = [v for wh in layer.anchors for v in wh]
            out.append("anchors=" + ",".join(_fmt_anchor(v) for v in flat))
            out.append(f"classes={layer.classes}")
    return "\n".join(out) + "\n"


def _fmt_anchor(v: float) -> str:
    return str(int(v)) if float(v) == int(v) else repr(v)


def load_bundled_config(name: str = "yolov3-fish.cfg") -> NetworkDef:
    """Parse a config shipped with the package (single-class network by default)."""
    text = resources.files("fishdet.data").joinpath(name).read_text()
    return parse_network_config(text)
