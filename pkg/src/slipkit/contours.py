"""Contact-region extraction: connected components, Moore boundary
tracing of the predominant region, and ellipse-based mask denoising."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import (
    Contour,
    DegenerateFitError,
    EllipseParams,
    NoContactError,
    as_mask,
    direction_angle,
)

DEFAULT_MIN_AREA = 25

_EIGHT = np.ones((3, 3), dtype=np.uint8)

# Moore neighborhood in clockwise screen order (y down), starting north.
_MOORE = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]
_MOORE_INDEX = {off: i for i, off in enumerate(_MOORE)}


@dataclass(frozen=True)
class Component:
    """One 8-connected region of a mask."""

    mask: np.ndarray  # full-size uint8 mask of this component only
    area: int
    seed: tuple[int, int]  # smallest (y, x) pixel, used as tie-break


def connected_components(mask) -> list[Component]:
    """8-connected components, largest area first.

    Ties are broken by the smallest (y, x) seed pixel so that the order
    is deterministic.  An empty mask yields an empty list.
    """
    m = as_mask(mask)
    labels, count = ndimage.label(m, structure=_EIGHT)
    comps = []
    for lab in range(1, count + 1):
        sel = labels == lab
        ys, xs = np.nonzero(sel)
        comps.append(Component(mask=sel.astype(np.uint8), area=int(sel.sum()),
                               seed=(int(ys[0]), int(xs[0]))))
    comps.sort(key=lambda c: (-c.area, c.seed))
    return comps


def moore_trace(component_mask) -> Contour:
    """Clockwise Moore-neighbor boundary trace of a single component.

    Starts at the topmost-leftmost pixel and stops when the start pixel
    is re-entered from the same backtrack cell (Jacob's criterion).
    """
    m = as_mask(component_mask)
    ys, xs = np.nonzero(m)
    if len(ys) == 0:
        raise NoContactError("cannot trace an empty mask")
    h, w = m.shape

    def is_set(x, y):
        return 0 <= x < w and 0 <= y < h and m[y, x]

    start = (int(xs[0]), int(ys[0]))  # topmost, then leftmost
    backtrack = (start[0], start[1] - 1)  # background by construction

    points = [start]
    current = start
    seen = {(current, backtrack)}
    limit = 8 * len(ys) + 8
    for _ in range(limit):
        # scan clockwise starting from the neighbor after the backtrack
        off = (backtrack[0] - current[0], backtrack[1] - current[1])
        k = _MOORE_INDEX[off]
        nxt = None
        for i in range(1, 9):
            dx, dy = _MOORE[(k + i) % 8]
            cand = (current[0] + dx, current[1] + dy)
            if is_set(*cand):
                nxt = cand
                pdx, pdy = _MOORE[(k + i - 1) % 8]
                backtrack = (current[0] + pdx, current[1] + pdy)
                break
        if nxt is None:  # isolated pixel
            break
        current = nxt
        state = (current, backtrack)
        if state in seen:  # trace re-entered a known configuration: closed
            break
        seen.add(state)
        points.append(current)
    return Contour(points=np.array(points, dtype=np.int64))


def predominant_contour(mask, min_area: int = DEFAULT_MIN_AREA) -> Contour:
    """Boundary of the largest contact component.

    Raises NoContactError when no component reaches ``min_area``, which
    signals "no reliable contact" to the callers.
    """
    comps = connected_components(mask)
    if not comps or comps[0].area < min_area:
        raise NoContactError(
            f"no contact component with area >= {min_area} px")
    return moore_trace(comps[0].mask)


def fit_ellipse(points) -> EllipseParams:
    """Direct least-squares ellipse fit (4AC - B^2 = 1 constraint).

    Uses the numerically stable split of the scatter matrix: the conic is
    solved as a small generalized eigenproblem on data centered and scaled
    beforehand.  Needs >= 5 non-collinear points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (N, 2) array of (x, y) points")
    if len(pts) < 5:
        raise DegenerateFitError("ellipse fit needs at least 5 points")

    mx, my = pts.mean(axis=0)
    x = pts[:, 0] - mx
    y = pts[:, 1] - my
    scale = np.sqrt(np.mean(x * x + y * y))
    if scale <= 0.0:
        raise DegenerateFitError("all points coincide")
    x /= scale
    y /= scale

    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError:
        raise DegenerateFitError("points are collinear or otherwise degenerate")
    m = s1 + s2 @ t
    m = np.vstack([m[2] / 2.0, -m[1], m[0] / 2.0])  # premultiply by inv(C1)
    try:
        evals, evecs = np.linalg.eig(m)
    except np.linalg.LinAlgError:
        raise DegenerateFitError("eigen-decomposition failed")
    cond = 4.0 * evecs[0] * evecs[2] - evecs[1] ** 2
    good = np.nonzero((cond > 0) & np.isfinite(evals))[0]
    if len(good) == 0:
        raise DegenerateFitError("no eigenvector satisfies the ellipse constraint")
    a1 = np.real(evecs[:, good[0]])
    conic = np.concatenate([a1, t @ a1])
    return _conic_to_params(conic, mx, my, scale)


def _conic_to_params(conic, mx, my, scale) -> EllipseParams:
    """Convert Ax^2+Bxy+Cy^2+Dx+Ey+F=0 (in centered/scaled coords) to
    canonical center/axes/orientation in the original frame."""
    A, B, C, D, E, F = (float(v) for v in conic)
    aq = np.array([[A, B / 2, D / 2], [B / 2, C, E / 2], [D / 2, E / 2, F]])
    a33 = aq[:2, :2]
    det33 = np.linalg.det(a33)
    if det33 <= 0:
        raise DegenerateFitError("fitted conic is not an ellipse")
    cx, cy = np.linalg.solve(a33, [-D / 2, -E / 2])
    evals, evecs = np.linalg.eigh(a33)
    axes_sq = -np.linalg.det(aq) / (det33 * evals)
    if np.any(axes_sq <= 0):
        raise DegenerateFitError("fitted conic has non-positive axes")
    axes = np.sqrt(axes_sq)
    # the conic's overall sign is arbitrary, so pick the major direction
    # by the axis length it produces rather than by eigenvalue order
    major = int(np.argmax(axes_sq))
    vx, vy = evecs[0, major], evecs[1, major]
    theta = direction_angle(vx, vy)
    a, b = float(max(axes)), float(min(axes))
    return EllipseParams(cx=float(cx * scale + mx), cy=float(cy * scale + my),
                         a=a * scale, b=b * scale, theta=theta)


def rasterize_ellipse(params: EllipseParams, width: int, height: int) -> np.ndarray:
    """Filled rasterization of an ellipse: pixels whose centers fall inside."""
    ys, xs = np.mgrid[0:height, 0:width]
    dx = xs - params.cx
    dy = ys - params.cy
    th = np.deg2rad(params.theta)
    # axis frame for y-down CCW angles: e_major=(cos, -sin), e_minor=(sin, cos)
    u = dx * np.cos(th) - dy * np.sin(th)
    v = dx * np.sin(th) + dy * np.cos(th)
    inside = (u / params.a) ** 2 + (v / params.b) ** 2 <= 1.0
    return inside.astype(np.uint8)


def ellipse_denoise(mask, min_area: int = DEFAULT_MIN_AREA) -> np.ndarray:
    """Replace the mask with the filled ellipse fitted to its predominant
    contour, smoothing out ragged boundaries and dropping stray specks."""
    m = as_mask(mask)
    contour = predominant_contour(m, min_area=min_area)
    params = fit_ellipse(contour.points)
    return rasterize_ellipse(params, width=m.shape[1], height=m.shape[0])
