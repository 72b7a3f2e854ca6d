"""Binary mask production: sigmoid + threshold on externally computed
logits, a difference-image baseline segmenter, and rasterization of
polygon annotations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import contours
from .core import ConfigError, as_gray, as_mask, as_prob_map

DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class PolygonAnnotation:
    """One labeled polygon (LabelMe style): label plus (x, y) vertices."""

    label: str
    points: np.ndarray  # (N, 2) float array

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ValueError("polygon needs at least 3 (x, y) vertices")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def sigmoid_map(logits) -> np.ndarray:
    """Squash raw logits into [0, 1] probabilities, elementwise."""
    a = np.asarray(logits, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"logit grid must be 2-D and non-empty, got shape {a.shape}")
    bad = np.argwhere(~np.isfinite(a))
    if len(bad):
        y, x = bad[0]
        raise ValueError(f"non-finite logit at (x={x}, y={y})")
    return expit(a)


def binarize(prob_map, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Threshold a probability map into a {0, 1} mask.

    The comparison is >=, so a pixel exactly at the threshold counts as
    contact.
    """
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must lie in (0, 1), got {threshold}")
    p = as_prob_map(prob_map)
    return (p >= threshold).astype(np.uint8)


def to_eight_bit(mask) -> np.ndarray:
    """Inverse normalization of a mask back to the [0, 255] range."""
    return as_gray(as_mask(mask) * 255)


def diff_segment(contact, reference, delta: float) -> np.ndarray:
    """Baseline segmentation by absolute difference of two grayscale
    frames, keeping only the largest connected region.

    delta = 0 degenerates to an all-ones mask and triggers a warning.
    """
    c = as_gray(contact).astype(np.int16)
    r = as_gray(reference).astype(np.int16)
    if c.shape != r.shape:
        raise ValueError(f"dimension mismatch: contact {c.shape} vs reference {r.shape}")
    if delta <= 0:
        warnings.warn("delta <= 0 marks every pixel as contact", stacklevel=2)
    raw = (np.abs(c - r) >= delta).astype(np.uint8)
    if not raw.any() or raw.all():
        return raw
    comps = contours.connected_components(raw)
    return comps[0].mask


def rasterize_polygon(ann: PolygonAnnotation, width: int, height: int) -> np.ndarray:
    """Even-odd fill of a polygon onto a pixel grid.

    A pixel is set when its center (integer coordinates) lies strictly
    inside by the even-odd rule or exactly on a polygon edge.
    """
    pts = ann.points
    # shoelace area; zero-area polygons cannot be filled
    x, y = pts[:, 0], pts[:, 1]
    area2 = np.abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    if area2 < 1e-12:
        raise ValueError("polygon has zero area")

    ys, xs = np.mgrid[0:height, 0:width]
    px = xs.astype(np.float64)
    py = ys.astype(np.float64)
    inside = np.zeros((height, width), dtype=bool)
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        # even-odd crossing test, half-open in y to count vertices once
        crosses = (ay <= py) != (by <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (px < xint)

    on_edge = np.zeros_like(inside)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        tol = 1e-9 * max(1.0, abs(bx - ax) + abs(by - ay))
        dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
        seg_len2 = (bx - ax) ** 2 + (by - ay) ** 2
        on_edge |= (np.abs(cross) <= tol) & (dot >= -1e-9) & (dot <= seg_len2 + 1e-9)

    return (inside | on_edge).astype(np.uint8)


def annotation_mask(annotations, width: int, height: int) -> np.ndarray:
    """Union of several polygon annotations as one binary mask."""
    out = np.zeros((height, width), dtype=np.uint8)
    for ann in annotations:
        out |= rasterize_polygon(ann, width, height)
    return out
