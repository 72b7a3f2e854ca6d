"""Shared domain types, coordinate and angle conventions.

Conventions used across the package:

* x grows rightward (columns), y grows downward (rows), matching image
  indexing.  Grids are 2-D numpy arrays indexed ``[y, x]``.
* Angles are degrees, measured counterclockwise from the +x axis as seen
  on screen.  Because y points down, a direction ``(dx, dy)`` maps to
  ``atan2(-dy, dx)``.
* An unoriented axis has period 180, so orientations are canonicalized
  to [0, 180).  Relative rotations live in [-90, 90].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class SlipkitError(Exception):
    """Base class for all pipeline errors."""


class NoContactError(SlipkitError):
    """No contact region large enough to analyse."""


class DegenerateFitError(SlipkitError):
    """Conic fit failed or did not yield an ellipse."""


class DegenerateSkeletonError(SlipkitError):
    """Skeleton has too few pixels to define an axis."""


class InitialContactUnreliableError(SlipkitError):
    """First frame of a lift does not define a reliable axis."""


class ConfigError(SlipkitError):
    """Invalid configuration or parameter value."""


class DataMismatchError(SlipkitError):
    """Input files that should pair up do not."""


# ---------------------------------------------------------------------------
# Grid validation helpers.  Images, probability maps and masks are plain
# numpy arrays; these normalize dtype and enforce the type invariants.
# ---------------------------------------------------------------------------

def as_gray(image) -> np.ndarray:
    """Validate an 8-bit grayscale image (2-D uint8 array)."""
    a = np.asarray(image)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"grayscale image must be 2-D and non-empty, got shape {a.shape}")
    if a.dtype != np.uint8:
        if np.any((a < 0) | (a > 255)):
            raise ValueError("grayscale intensities must lie in [0, 255]")
        a = a.astype(np.uint8)
    return a


def as_prob_map(values) -> np.ndarray:
    """Validate a probability map: 2-D floats in [0, 1]."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"probability map must be 2-D and non-empty, got shape {a.shape}")
    if np.any(~np.isfinite(a)) or a.min() < 0.0 or a.max() > 1.0:
        raise ValueError("probability map values must be finite and in [0, 1]")
    return a


def as_mask(values) -> np.ndarray:
    """Validate a binary mask: 2-D array of exactly {0, 1}, dtype uint8."""
    a = np.asarray(values)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"binary mask must be 2-D and non-empty, got shape {a.shape}")
    if a.dtype == bool:
        return a.astype(np.uint8)
    if not np.isin(a, (0, 1)).all():
        raise ValueError("binary mask values must be exactly 0 or 1")
    return a.astype(np.uint8)


def luminance(rgb) -> np.ndarray:
    """Collapse an RGB image (H, W, 3) to grayscale with Rec.601 weights."""
    a = np.asarray(rgb, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty (H, W, 3) RGB image, got shape {a.shape}")
    gray = 0.299 * a[:, :, 0] + 0.587 * a[:, :, 1] + 0.114 * a[:, :, 2]
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Angle helpers
# ---------------------------------------------------------------------------

def canonical_axis(angle_deg: float) -> float:
    """Reduce an axis orientation to [0, 180)."""
    a = float(angle_deg) % 180.0
    return a if a < 180.0 else 0.0


def direction_angle(dx: float, dy: float) -> float:
    """Orientation in [0, 180) of direction (dx, dy), y-down convention."""
    return canonical_axis(math.degrees(math.atan2(-dy, dx)))


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipseParams:
    """Canonical ellipse: center, semi-axes (a >= b > 0), orientation.

    Constructor inputs with a < b are normalized by swapping axes and
    rotating theta by 90 degrees; theta always ends up in [0, 180).
    """

    cx: float
    cy: float
    a: float
    b: float
    theta: float

    def __post_init__(self):
        a, b, theta = self.a, self.b, self.theta
        if a < b:
            a, b = b, a
            theta = theta + 90.0
        if b <= 0.0:
            raise ValueError("ellipse semi-axes must be positive")
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "theta", canonical_axis(theta))

    @property
    def aspect(self) -> float:
        return self.a / self.b


_NEIGHBOR_STEPS = {(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)} - {(0, 0)}


@dataclass(frozen=True)
class Contour:
    """Closed boundary trace: ordered (x, y) pixel coordinates.

    Consecutive points (and the last-to-first pair) are 8-neighbors.
    """

    points: np.ndarray  # (N, 2) int array of (x, y)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("contour needs at least 3 (x, y) points")
        closed = np.vstack([pts, pts[:1]])
        steps = np.diff(closed, axis=0)
        for dx, dy in steps:
            if (int(dx), int(dy)) not in _NEIGHBOR_STEPS and (dx, dy) != (0, 0):
                raise ValueError("consecutive contour points must be 8-neighbors")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MarkerVector:
    """Vector joining two fiducial marker centers, in pixels."""

    dx: float
    dy: float

    def __post_init__(self):
        if math.hypot(self.dx, self.dy) <= 0.0:
            raise ValueError("marker vector must have positive norm")

    @property
    def norm(self) -> float:
        return math.hypot(self.dx, self.dy)


@dataclass(frozen=True)
class AngleSample:
    """One frame of a lift: raw and filtered relative angle, in degrees."""

    frame_index: int
    raw_angle: float
    filtered_angle: float
    reliable: bool


@dataclass(frozen=True)
class LiftTrace:
    """Predicted angles for one lift, optionally paired with ground truth."""

    object_id: str
    samples: tuple[AngleSample, ...]
    ground_truth: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "ground_truth", tuple(float(g) for g in self.ground_truth))
        if self.ground_truth and len(self.ground_truth) != len(self.samples):
            raise ValueError("ground truth length must match sample count")
