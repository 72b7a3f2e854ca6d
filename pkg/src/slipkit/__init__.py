"""slipkit: rotational-slip angle estimation from tactile contact masks."""

from .core import (
    AngleSample,
    ConfigError,
    Contour,
    DataMismatchError,
    DegenerateFitError,
    DegenerateSkeletonError,
    EllipseParams,
    InitialContactUnreliableError,
    LiftTrace,
    MarkerVector,
    NoContactError,
    SlipkitError,
    canonical_axis,
    direction_angle,
    luminance,
)
from .contours import (
    connected_components,
    ellipse_denoise,
    fit_ellipse,
    predominant_contour,
)
from .estimators import (
    EstimatorKind,
    WindowFilter,
    axis_angle_from_skeleton,
    ellipse_angle,
    pca_angle,
    relative_angle,
    skeleton_angle,
    skeletonize,
    track_lift,
)
from .maskgen import (
    PolygonAnnotation,
    binarize,
    diff_segment,
    rasterize_polygon,
    sigmoid_map,
    to_eight_bit,
)
from .metrics import (
    MareReport,
    SegScore,
    dice,
    ground_truth_angle,
    iou,
    mare,
    rotational_error,
    window_sweep,
)
from .synth import NoiseSpec, ShapeSpec, gen_lift, gen_mask, standard_suite

__version__ = "0.1.0"
