"""Contact-axis angle estimators and per-lift tracking.

Three interchangeable estimators turn a contact mask into an axis
orientation in [0, 180):

* skeleton -- thin the predominant region to a line (Zhang-Suen) and fit
  an orthogonal least-squares line through the skeleton pixels,
* pca      -- principal direction of all set pixels' covariance,
* ellipse  -- major-axis orientation of an ellipse fitted to the
  predominant contour.

Relative rotation against the first frame resolves the 180-degree axis
ambiguity; a sliding-window mean smooths the per-frame angles.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import contours
from .core import (
    AngleSample,
    DegenerateFitError,
    DegenerateSkeletonError,
    InitialContactUnreliableError,
    LiftTrace,
    NoContactError,
    as_mask,
    direction_angle,
)

DEFAULT_ELONGATION_MIN = 1.2
MIN_SKELETON_PX = 5

# Spine selection for the skeleton estimator: keep only skeleton pixels
# whose distance to the region boundary is close to the maximum.  Thinning
# artifacts (corner branches, end hooks) sit in shallow parts of the region
# and are excluded this way, while the true medial spine survives.
SPINE_DEPTH_FRAC = 0.9

# Reliability: a trustworthy axis must span a length comparable to the
# region scale.  Near-circular or diagonally-collapsed skeletons produce a
# short cluster instead and are flagged.
MIN_AXIS_EXTENT_FRAC = 0.5

# The region is upsampled (nearest neighbor) before thinning: thinning
# artifacts have a fixed pixel size, so working at double resolution
# halves their relative influence and makes the estimate stable under
# further upscaling of the input.
SKELETON_UPSAMPLE = 2


class EstimatorKind(enum.Enum):
    SKELETON = "skeleton"
    PCA = "pca"
    ELLIPSE = "ellipse"

    @classmethod
    def from_string(cls, name: str) -> "EstimatorKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown estimator {name!r}; "
                             f"expected one of {[k.value for k in cls]}")


# ---------------------------------------------------------------------------
# Zhang-Suen thinning
# ---------------------------------------------------------------------------

def _subiteration(img: np.ndarray, step: int) -> np.ndarray:
    """One Zhang-Suen subiteration; returns the deletion mask."""
    p = np.pad(img, 1)
    # neighbors clockwise from north (y down): P2..P9
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]
    ring = [p2, p3, p4, p5, p6, p7, p8, p9]
    b = sum(ring)
    a = sum(((ring[i] == 0) & (ring[(i + 1) % 8] == 1)).astype(np.uint8)
            for i in range(8))
    if step == 0:
        c1 = p2 * p4 * p6 == 0
        c2 = p4 * p6 * p8 == 0
    else:
        c1 = p2 * p4 * p8 == 0
        c2 = p2 * p6 * p8 == 0
    return (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & c1 & c2


def skeletonize(mask) -> np.ndarray:
    """Zhang-Suen two-subiteration thinning, iterated to fixpoint.

    The result is a 1-pixel-wide 8-connected skeleton and always a
    subset of the input mask.
    """
    img = as_mask(mask).copy()
    if not img.any():
        raise NoContactError("cannot skeletonize an empty mask")
    while True:
        changed = False
        for step in (0, 1):
            kill = _subiteration(img, step)
            if kill.any():
                img[kill] = 0
                changed = True
        if not changed:
            return img


# ---------------------------------------------------------------------------
# Axis angles
# ---------------------------------------------------------------------------

def _principal_direction(xs: np.ndarray, ys: np.ndarray):
    """Largest-eigenvalue direction of the pixel covariance.

    Returns (angle_deg, eigenvalue_ratio); the ratio is inf when the
    points are exactly collinear.
    """
    x = xs - xs.mean()
    y = ys - ys.mean()
    cov = np.array([[np.mean(x * x), np.mean(x * y)],
                    [np.mean(x * y), np.mean(y * y)]])
    evals, evecs = np.linalg.eigh(cov)
    vx, vy = evecs[0, 1], evecs[1, 1]  # eigh sorts ascending
    ratio = np.inf if evals[0] <= 0 else float(evals[1] / evals[0])
    return direction_angle(vx, vy), ratio


def axis_angle_from_skeleton(skeleton) -> float:
    """Orthogonal least-squares line through skeleton pixel centers.

    Total least squares (the principal covariance direction) instead of
    y-on-x regression so vertical contacts are not singular.
    """
    sk = as_mask(skeleton)
    ys, xs = np.nonzero(sk)
    if len(xs) < 2:
        raise DegenerateSkeletonError("skeleton needs at least 2 pixels")
    angle, _ = _principal_direction(xs.astype(float), ys.astype(float))
    return angle


def pca_angle(mask, elongation_min: float = DEFAULT_ELONGATION_MIN):
    """Principal-component orientation of all set pixels.

    Returns (angle_deg, reliable); reliable is False for near-isotropic
    regions (eigenvalue ratio below ``elongation_min``), where the axis
    is not meaningful.
    """
    m = as_mask(mask)
    ys, xs = np.nonzero(m)
    if len(xs) < 2:
        raise NoContactError("PCA needs at least 2 contact pixels")
    angle, ratio = _principal_direction(xs.astype(float), ys.astype(float))
    # eigenvalues scale with squared axis lengths, so take the square
    # root to compare against the same axis-aspect threshold the other
    # estimators use
    return angle, np.sqrt(ratio) >= elongation_min


def ellipse_angle(mask, elongation_min: float = DEFAULT_ELONGATION_MIN,
                  min_area: int = contours.DEFAULT_MIN_AREA):
    """Major-axis orientation of the ellipse fitted to the predominant
    contour.  Returns (angle_deg, reliable)."""
    contour = contours.predominant_contour(mask, min_area=min_area)
    params = contours.fit_ellipse(contour.points)
    return params.theta, params.aspect >= elongation_min


def skeleton_angle(mask, elongation_min: float = DEFAULT_ELONGATION_MIN,
                   min_area: int = contours.DEFAULT_MIN_AREA,
                   denoise: bool = False):
    """Axis orientation via thinning of the predominant contact region.

    The predominant region is thinned and the line is fitted only to the
    deep part of the skeleton (pixels whose distance to the region
    boundary is within ``SPINE_DEPTH_FRAC`` of the maximum), which
    excludes thinning artifacts such as corner branches and end hooks.

    With ``denoise=True`` the region is first replaced by its fitted
    ellipse before thinning (ablation variant); the default thins the
    raw region.

    Returns (angle_deg, reliable).  Skeletons that are tiny or whose
    axial extent is short relative to the region scale (circular
    contacts collapse to almost a single pixel, near-diagonal thin bars
    can collapse likewise) are flagged unreliable.
    """
    if denoise:
        region = contours.ellipse_denoise(mask, min_area=min_area)
    else:
        comps = contours.connected_components(mask)
        if not comps or comps[0].area < min_area:
            raise NoContactError(f"no contact component with area >= {min_area} px")
        region = comps[0].mask
    if SKELETON_UPSAMPLE > 1:
        region = np.kron(region, np.ones((SKELETON_UPSAMPLE,) * 2, dtype=region.dtype))
    area = int(region.sum())
    sk = skeletonize(region)
    ys, xs = np.nonzero(sk)
    if len(xs) < 2:
        raise DegenerateSkeletonError("skeleton collapsed to a point")
    xs = xs.astype(float)
    ys = ys.astype(float)
    depth = ndimage.distance_transform_edt(region)[ys.astype(int), xs.astype(int)]
    keep = depth >= SPINE_DEPTH_FRAC * depth.max()
    if keep.sum() < MIN_SKELETON_PX:
        keep = np.ones(len(xs), dtype=bool)
    angle, ratio = _principal_direction(xs[keep], ys[keep])
    # reliability looks at the whole skeleton: the spine subset is
    # deliberately short for rounded shapes, but a healthy skeleton still
    # spans the region along the fitted axis
    th = np.deg2rad(angle)
    t = (xs - xs.mean()) * np.cos(th) - (ys - ys.mean()) * np.sin(th)
    extent = float(t.max() - t.min())
    reliable = (len(xs) >= MIN_SKELETON_PX
                and extent >= MIN_AXIS_EXTENT_FRAC * np.sqrt(area)
                and ratio >= elongation_min)
    return angle, reliable


_ESTIMATORS = {
    EstimatorKind.SKELETON: skeleton_angle,
    EstimatorKind.PCA: pca_angle,
    EstimatorKind.ELLIPSE: ellipse_angle,
}


def estimate_axis(mask, kind: EstimatorKind, **params):
    """Dispatch to one estimator; returns (angle_deg, reliable)."""
    return _ESTIMATORS[kind](mask, **params)


# ---------------------------------------------------------------------------
# Relative angles and filtering
# ---------------------------------------------------------------------------

def relative_angle(current_axis: float, initial_axis: float) -> float:
    """Rotation between two axis orientations, in [-90, 90].

    Axes are unoriented (period 180), so the minimal-magnitude
    representative of the difference is chosen.
    """
    return (float(current_axis) - float(initial_axis) + 90.0) % 180.0 - 90.0


class WindowFilter:
    """Running mean over the last ``n`` angles.

    During warm-up (fewer than n samples seen) the mean of the available
    samples is returned, so early frames are not delayed.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("window size must be >= 1")
        self.n = int(n)
        self.buffer: deque[float] = deque(maxlen=self.n)

    def push(self, raw: float) -> float:
        self.buffer.append(float(raw))
        return sum(self.buffer) / len(self.buffer)


# ---------------------------------------------------------------------------
# Lift tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisEstimate:
    """Per-frame estimator output; angle is None when no axis exists."""

    angle: float | None
    reliable: bool


def axis_series(masks, kind: EstimatorKind, **params) -> list[AxisEstimate]:
    """Run one estimator over a mask sequence.

    Frames with no usable contact (empty, too small, degenerate fit or
    skeleton) yield ``AxisEstimate(None, False)`` instead of raising.
    """
    out = []
    for m in masks:
        try:
            angle, reliable = estimate_axis(m, kind, **params)
            out.append(AxisEstimate(angle=angle, reliable=bool(reliable)))
        except (NoContactError, DegenerateFitError, DegenerateSkeletonError):
            out.append(AxisEstimate(angle=None, reliable=False))
    return out


def trace_from_axes(axes, n: int, object_id: str = "",
                    ground_truth=()) -> LiftTrace:
    """Turn per-frame axis estimates into a filtered relative-angle trace.

    The first frame defines the reference axis and must be reliable.
    Frames without an axis hold the previous raw/filtered values and are
    flagged unreliable; they do not enter the filter window.
    """
    axes = list(axes)
    if not axes:
        raise ValueError("empty lift sequence")
    if axes[0].angle is None or not axes[0].reliable:
        raise InitialContactUnreliableError(
            "first frame has no reliable contact axis (near-circular or "
            "missing contact region)")
    initial = axes[0].angle
    filt = WindowFilter(n)
    samples = []
    prev_raw = 0.0
    prev_filtered = 0.0
    for i, est in enumerate(axes):
        if est.angle is None:
            samples.append(AngleSample(frame_index=i, raw_angle=prev_raw,
                                       filtered_angle=prev_filtered,
                                       reliable=False))
            continue
        raw = relative_angle(est.angle, initial)
        filtered = filt.push(raw)
        samples.append(AngleSample(frame_index=i, raw_angle=raw,
                                   filtered_angle=filtered,
                                   reliable=est.reliable))
        prev_raw, prev_filtered = raw, filtered
    return LiftTrace(object_id=object_id, samples=tuple(samples),
                     ground_truth=tuple(ground_truth))


def track_lift(masks, kind: EstimatorKind, n: int, object_id: str = "",
               ground_truth=(), **params) -> LiftTrace:
    """Full per-lift tracking: estimate, reference to frame 0, filter."""
    masks = list(masks)
    axes = axis_series(masks, kind, **params)
    return trace_from_axes(axes, n, object_id=object_id,
                           ground_truth=ground_truth)
