"""fishdet: CPU inference, evaluation, feature-map PCA and
pseudo-labeling for single-stage fish detectors.

The package is organized around the lifecycle of a detector:

- ``netdef`` / ``weights``: parse network definitions and binary weights
- ``image`` / ``engine``: preprocess rasters and run the forward pass
- ``boxes``: decode head tensors into scored, suppressed detections
- ``metrics``: IOU, PR curves, AP/mAP and the confusion arithmetic
- ``pca`` / ``render``: feature-map introspection and visualization
- ``dataset``: label files, splits, pseudo-labeling, evaluation
- ``cli`` / ``server``: command-line front end and the review service
"""

from .boxes import (
    DEFAULT_CONF_THRESHOLD,
    DEFAULT_NMS_THRESHOLD,
    Detection,
    decode_head,
    detect_image,
    merge_scales,
    nms,
    score_and_filter,
    unletterbox,
)
from .dataset import (
    DatasetManifest,
    LabeledImage,
    evaluate_dataset,
    pseudo_label,
    split_dataset,
)
from .engine import conv2d, conv_forward, forward, route_concat, shortcut_add, upsample2x
from .image import LetterboxInfo, letterbox_preprocess, load_image, save_image
from .labels import GroundTruthBox, parse_labels, write_labels
from .metrics import (
    ConfusionCounts,
    EvalReport,
    PRPoint,
    average_precision,
    epochs_from_iterations,
    iou,
    match_detections,
    mean_ap,
    pr_curve,
)
from .netdef import (
    NetworkDef,
    load_bundled_config,
    parse_network_config,
    serialize_network_config,
    validate_head_filters,
)
from .pca import FeatureMapSet, PcaResult, component_image, pca, unpack, variance_report
from .render import draw_detections, render
from .weights import WeightedNetwork, load_weights, load_weights_file, parameter_count

__version__ = "0.1.0"
