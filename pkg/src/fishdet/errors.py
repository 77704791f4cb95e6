"""Exception types raised across the toolkit.

Config and weights errors carry enough context (section index, key,
byte counts) to point at the offending spot in the input file.
"""


class FishdetError(Exception):
    """Base class for all toolkit errors."""


# --- network definition parsing ---------------------------------------------

class ConfigError(FishdetError):
    """Problem in a network definition file.

    ``section`` is the 1-based index of the offending layer section
    (0 refers to the [net] section), ``key`` the offending key if any.
    """

    def __init__(self, message, section=None, key=None):
        self.section = section
        self.key = key
        ctx = []
        if section is not None:
            ctx.append(f"section {section}")
        if key is not None:
            ctx.append(f"key '{key}'")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)


class UnknownSection(ConfigError):
    pass


class MissingRequiredKey(ConfigError):
    pass


class DanglingLayerReference(ConfigError):
    pass


class HeadFilterMismatch(ConfigError):
    pass


class DegenerateClassCount(ConfigError):
    """classes=0 would yield 15 head filters; never meaningful."""


class ShapeMismatch(FishdetError):
    """Tensor shapes incompatible for the requested operation."""


# --- weights loading ---------------------------------------------------------

class WeightsError(FishdetError):
    pass


class TruncatedFile(WeightsError):
    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"weights file ends early: expected {expected} floats, found {actual}")


class TrailingBytes(WeightsError):
    def __init__(self, count):
        self.count = count
        super().__init__(f"{count} unconsumed bytes after the last layer")


class NonFiniteWeight(WeightsError):
    def __init__(self, layer, index):
        self.layer = layer
        self.index = index
        super().__init__(f"non-finite weight in layer {layer} at float index {index}")


# --- engine ------------------------------------------------------------------

class EmptyImage(FishdetError):
    pass


class TargetNotMultipleOf32(FishdetError):
    pass


class ChannelMismatch(ShapeMismatch):
    pass


class NonFiniteActivation(FishdetError):
    def __init__(self, layer):
        self.layer = layer
        super().__init__(f"non-finite activation in layer {layer}")


class ChannelCountMismatch(ShapeMismatch):
    """Head tensor channel count does not equal 3*(classes+5)."""


# --- metrics -----------------------------------------------------------------

class EmptyTruthSet(FishdetError):
    """PR curve requested with zero ground-truth boxes."""


class UndefinedAP(FishdetError):
    """Average precision is undefined without ground truths."""


class NoClassesEvaluated(FishdetError):
    """mAP requested but no class has any ground truth."""


class ZeroImages(FishdetError):
    pass


# --- PCA ---------------------------------------------------------------------

class InconsistentDims(ShapeMismatch):
    pass


class DegenerateMatrix(FishdetError):
    """PCA needs at least two samples (columns)."""


class IndexOutOfRange(FishdetError, IndexError):
    pass


class NonFiniteValue(FishdetError):
    pass


# --- labels / datasets -------------------------------------------------------

class MalformedLine(FishdetError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class OutOfRangeCoordinate(FishdetError):
    def __init__(self, line_no, value):
        self.line_no = line_no
        self.value = value
        super().__init__(f"line {line_no}: coordinate {value!r} outside [0, 1]")


class EmptyDataset(FishdetError):
    pass


class MissingLabelFile(FishdetError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"no label file: {path}")
