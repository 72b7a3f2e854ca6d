"""Synthetic contact masks and lift sequences with exact known
orientation, used as the benchmark where hardware data is unavailable.

Shapes are rasterized analytically at each requested angle (no pixel
resampling), so rotations do not accumulate interpolation error.  All
randomness flows from numpy's PCG64 generator seeded per frame from the
declared seed, making regeneration bit-identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import canonical_axis

SHAPE_KINDS = ("bar", "ellipse", "superellipse")

MAX_TRAJECTORY_DEG = 30.0  # operating range of the slip experiments

# boundary-noise texture: smooth low-harmonic field plus localized bumps
_FIELD_HARMONICS = (2, 3, 4, 5)
_N_BUMPS = 2

# smear tails: thin streaks attached to the region boundary, imitating
# segmentation smear along the motion direction
_TAIL_LEN = (10.0, 24.0)
_TAIL_SPREAD = 0.7  # max deviation (radians) from the outward direction


@dataclass(frozen=True)
class ShapeSpec:
    """Analytic contact shape: kind, half-extents, center and angle.

    ``major``/``minor`` are half-length/half-width for bars and
    semi-axes for (super)ellipses; aspect = major/minor >= 1.
    """

    kind: str
    major: float
    minor: float
    center: tuple[float, float]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if not self.major >= self.minor > 0:
            raise ValueError("need major >= minor > 0")

    @property
    def aspect(self) -> float:
        return self.major / self.minor

    @property
    def bound_radius(self) -> float:
        if self.kind == "bar":
            return math.hypot(self.major, self.minor)
        return self.major


@dataclass(frozen=True)
class NoiseSpec:
    """Per-frame mask corruption, fully determined by the seed.

    Applied in a fixed order: size drift (isotropic scale fluctuation),
    boundary jitter (smooth radial field plus a couple of localized
    bumps, RMS amplitude in pixels), smear tails (thin streaks sticking
    out of the boundary; ``tail_rate`` is the expected count per frame),
    then additive speckle (random spurious contact pixels).
    """

    boundary_jitter_px: float = 0.0
    speckle_rate: float = 0.0
    size_drift: float = 0.0
    tail_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.boundary_jitter_px < 0 or not 0 <= self.speckle_rate <= 1 \
                or not 0 <= self.size_drift <= 1 or self.tail_rate < 0:
            raise ValueError("invalid noise parameters")


NO_NOISE = NoiseSpec()


def _boundary_radius(spec: ShapeSpec, major: float, minor: float,
                     phi: np.ndarray) -> np.ndarray:
    """Distance from center to the shape boundary along local angle phi."""
    c = np.abs(np.cos(phi))
    s = np.abs(np.sin(phi))
    if spec.kind == "bar":
        with np.errstate(divide="ignore"):
            return np.minimum(np.where(c > 0, major / c, np.inf),
                              np.where(s > 0, minor / s, np.inf))
    if spec.kind == "ellipse":
        return major * minor / np.hypot(minor * c, major * s)
    # superellipse, exponent 4
    return ((c / major) ** 4 + (s / minor) ** 4) ** -0.25


def _jitter_field(phi: np.ndarray, amplitude: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Random radial perturbation rho(phi) with RMS ~ amplitude pixels."""
    if amplitude <= 0:
        return np.zeros_like(phi)
    coeffs = rng.standard_normal(2 * len(_FIELD_HARMONICS))
    field = np.zeros_like(phi)
    for i, k in enumerate(_FIELD_HARMONICS):
        field += coeffs[2 * i] * np.cos(k * phi) + coeffs[2 * i + 1] * np.sin(k * phi)
    field *= amplitude / math.sqrt(len(_FIELD_HARMONICS))
    for _ in range(_N_BUMPS):
        center = rng.uniform(-math.pi, math.pi)
        width = rng.uniform(0.15, 0.35)
        height = rng.uniform(1.5, 3.0) * amplitude * rng.choice([-1.0, 1.0])
        d = np.angle(np.exp(1j * (phi - center)))
        field += height * np.exp(-0.5 * (d / width) ** 2)
    return field


def _draw_streak(mask: np.ndarray, x0: float, y0: float,
                 direction: float, length: float) -> None:
    """Rasterize one 2-px-wide streak into the mask, in place."""
    h, w = mask.shape
    for s in np.arange(0.0, length, 0.7):
        xi = int(round(x0 + s * math.cos(direction)))
        yi = int(round(y0 + s * math.sin(direction)))
        if 0 <= xi < w and 0 <= yi < h:
            mask[max(0, yi - 1):yi + 1, max(0, xi - 1):xi + 1] = 1


def _boundary_pixels(mask: np.ndarray):
    boundary = mask.astype(bool) & ~ndimage.binary_erosion(mask)
    ys, xs = np.nonzero(boundary)
    return xs, ys


def _add_tails(mask: np.ndarray, center: tuple[float, float],
               rate: float, rng: np.random.Generator) -> None:
    """Attach thin outward streaks to the region boundary, in place."""
    count = int(rng.poisson(rate))
    if count == 0:
        return
    bxs, bys = _boundary_pixels(mask)
    if len(bxs) == 0:
        return
    cx, cy = center
    for _ in range(count):
        i = int(rng.integers(len(bxs)))
        x0, y0 = float(bxs[i]), float(bys[i])
        outward = math.atan2(y0 - cy, x0 - cx)
        direction = outward + rng.uniform(-_TAIL_SPREAD, _TAIL_SPREAD)
        _draw_streak(mask, x0, y0, direction, rng.uniform(*_TAIL_LEN))


def _attach_tail_at(mask: np.ndarray, center: tuple[float, float],
                    phi: float, offset: float, length: float) -> None:
    """Attach one streak at the boundary point lying in world direction
    ``phi`` from the region center (used for lift-persistent tails)."""
    bxs, bys = _boundary_pixels(mask)
    if len(bxs) == 0:
        return
    cx, cy = center
    ang = np.arctan2(bys - cy, bxs - cx)
    i = int(np.argmin(np.abs(np.angle(np.exp(1j * (ang - phi))))))
    _draw_streak(mask, float(bxs[i]), float(bys[i]), phi + offset, length)


def _tail_schedule(frames: int, rate: float, rng: np.random.Generator):
    """Lift-level tail plan: a Poisson number of concurrent tail slots;
    each slot holds a tail (fixed world angle, direction, length) for a
    random lifetime, then re-rolls.  Returns per-frame parameter lists."""
    plan = [[] for _ in range(frames)]
    for _ in range(int(rng.poisson(rate))):
        frame = 0
        while frame < frames:
            life = int(rng.integers(8, 25))
            phi = rng.uniform(-math.pi, math.pi)
            offset = rng.uniform(-_TAIL_SPREAD, _TAIL_SPREAD)
            length = rng.uniform(*_TAIL_LEN)
            for i in range(frame, min(frame + life, frames)):
                plan[i].append((phi, offset, length))
            frame += life
    return plan


def gen_mask(spec: ShapeSpec, dims: tuple[int, int],
             noise: NoiseSpec = NO_NOISE,
             rng: np.random.Generator | None = None):
    """Rasterize one noisy shape instance.

    ``dims`` is (width, height).  Returns (mask, true_angle); the true
    angle is the spec angle canonicalized to [0, 180), or None for
    isotropic shapes (circles), whose orientation is undefined.
    """
    width, height = dims
    margin = spec.bound_radius + noise.boundary_jitter_px
    cx, cy = spec.center
    if cx - margin < 0 or cy - margin < 0 or cx + margin > width - 1 \
            or cy + margin > height - 1:
        raise ValueError("shape (plus jitter margin) exceeds image bounds")
    if rng is None:
        rng = np.random.default_rng(noise.seed)

    major, minor = spec.major, spec.minor
    if noise.size_drift > 0:
        scale = 1.0 + rng.uniform(-noise.size_drift, noise.size_drift)
        major *= scale
        minor *= scale

    ys, xs = np.mgrid[0:height, 0:width]
    dx = xs - cx
    dy = ys - cy
    th = math.radians(spec.angle)
    # local frame: u along the major axis (y-down CCW angle convention)
    u = dx * math.cos(th) - dy * math.sin(th)
    v = dx * math.sin(th) + dy * math.cos(th)
    r = np.hypot(u, v)
    phi = np.arctan2(v, u)
    boundary = _boundary_radius(spec, major, minor, phi)
    boundary = boundary + _jitter_field(phi, noise.boundary_jitter_px, rng)
    mask = (r <= boundary).astype(np.uint8)

    if noise.tail_rate > 0:
        _add_tails(mask, spec.center, noise.tail_rate, rng)

    if noise.speckle_rate > 0:
        speck = rng.random(mask.shape) < noise.speckle_rate
        mask[speck] = 1

    true_angle = None if spec.major == spec.minor else canonical_axis(spec.angle)
    return mask, true_angle


def gen_lift(spec: ShapeSpec, trajectory, dims: tuple[int, int],
             noise: NoiseSpec = NO_NOISE, allow_wide: bool = False):
    """Rotate one shape through a trajectory of angle offsets (degrees).

    Returns a list of (mask, gt_angle) pairs; gt is relative to frame 0.
    Each frame draws from its own sub-seeded generator, so frames are
    reproducible independently of one another.

    Smear tails persist across frames in the *sensor* frame: a tail keeps
    its world-coordinate anchor for a random lifetime while the object
    rotates underneath it, as gel smear marks do.  (Single-frame
    ``gen_mask`` draws independent tails instead.)
    """
    traj = [float(t) for t in trajectory]
    if not traj:
        raise ValueError("trajectory must contain at least one frame")
    if not allow_wide:
        for t in traj:
            if not 0.0 <= t <= MAX_TRAJECTORY_DEG:
                raise ValueError(
                    f"trajectory angle {t} outside [0, {MAX_TRAJECTORY_DEG}]; "
                    "pass allow_wide to override")
    frames = []
    seeds = np.random.SeedSequence(noise.seed).spawn(len(traj) + 1)
    tails = _tail_schedule(len(traj), noise.tail_rate,
                           np.random.default_rng(seeds[-1]))
    # tails are attached between jitter and speckle, same order as in
    # gen_mask, so the base mask is generated without either stage
    frame_noise = NoiseSpec(boundary_jitter_px=noise.boundary_jitter_px,
                            speckle_rate=0.0,
                            size_drift=noise.size_drift,
                            tail_rate=0.0, seed=noise.seed)
    for i, t in enumerate(traj):
        frame_spec = ShapeSpec(kind=spec.kind, major=spec.major,
                               minor=spec.minor, center=spec.center,
                               angle=spec.angle + t)
        rng = np.random.default_rng(seeds[i])
        mask, _ = gen_mask(frame_spec, dims, frame_noise, rng=rng)
        for phi, offset, length in tails[i]:
            _attach_tail_at(mask, spec.center, phi, offset, length)
        if noise.speckle_rate > 0:
            speck = rng.random(mask.shape) < noise.speckle_rate
            mask[speck] = 1
        frames.append((mask, t - traj[0]))
    return frames


# ---------------------------------------------------------------------------
# Standard benchmark suite: 9 shapes x 5 trajectories = 45 lifts
# ---------------------------------------------------------------------------

SUITE_DIMS = (128, 128)
SUITE_FRAMES = 35

_SUITE_SHAPES = [
    ("bar", 40.0, 12.0, 10.0),
    ("bar", 36.0, 14.0, 75.0),
    ("bar", 44.0, 11.0, 140.0),
    ("ellipse", 44.0, 14.0, 30.0),
    ("ellipse", 42.0, 13.0, 100.0),
    ("ellipse", 45.0, 15.0, 160.0),
    ("superellipse", 38.0, 14.0, 55.0),
    ("superellipse", 44.0, 16.0, 5.0),
    ("superellipse", 34.0, 12.0, 120.0),
]

_SUITE_FINALS = (15.0, 19.0, 23.0, 27.0, 30.0)


def _ramp(final: float, frames: int) -> list[float]:
    return [final * i / (frames - 1) for i in range(frames)]


@dataclass(frozen=True)
class SuiteLift:
    object_id: str
    lift_index: int
    spec: ShapeSpec
    trajectory: tuple[float, ...]
    noise: NoiseSpec


def standard_suite(seed: int = 7, boundary_jitter_px: float = 0.6,
                   speckle_rate: float = 0.014,
                   size_drift: float = 0.04,
                   tail_rate: float = 1.5,
                   frames: int = SUITE_FRAMES) -> list[SuiteLift]:
    """The 45-lift benchmark: 9 elongated shapes, 5 ramp lifts each."""
    cx = SUITE_DIMS[0] / 2.0
    cy = SUITE_DIMS[1] / 2.0
    lifts = []
    idx = 0
    for obj, (kind, major, minor, angle) in enumerate(_SUITE_SHAPES):
        spec = ShapeSpec(kind=kind, major=major, minor=minor,
                         center=(cx, cy), angle=angle)
        for final in _SUITE_FINALS:
            noise = NoiseSpec(boundary_jitter_px=boundary_jitter_px,
                              speckle_rate=speckle_rate,
                              size_drift=size_drift,
                              tail_rate=tail_rate,
                              seed=seed * 100_000 + idx)
            lifts.append(SuiteLift(object_id=f"shape{obj:02d}",
                                   lift_index=idx, spec=spec,
                                   trajectory=tuple(_ramp(final, frames)),
                                   noise=noise))
            idx += 1
    return lifts


def generate_suite_frames(lift: SuiteLift):
    """Masks and ground-truth angles for one suite lift."""
    frames = gen_lift(lift.spec, lift.trajectory, SUITE_DIMS, lift.noise)
    masks = [m for m, _ in frames]
    gts = [g for _, g in frames]
    return masks, gts
