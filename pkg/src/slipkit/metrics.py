"""Segmentation and angle-estimation scoring: Dice/IoU overlap, marker
ground-truth angle, per-frame rotational error and its per-lift/MARE
aggregation, and the window-size sweep."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import MarkerVector, as_mask
from .estimators import EstimatorKind, axis_series, trace_from_axes

DEFAULT_WINDOW_SIZES = (2, 4, 6, 8, 10)


@dataclass(frozen=True)
class SegScore:
    """Overlap scores for one predicted/labeled mask pair."""

    dice: float
    iou: float


@dataclass(frozen=True)
class MareReport:
    """Per-lift mean rotational errors and their average (MARE).

    mare is the unweighted mean of the per-lift mean REs; mare_std is
    the mean of the per-lift population standard deviations.
    """

    per_lift_mean_re: tuple[float, ...]
    per_lift_std: tuple[float, ...]
    mare: float
    mare_std: float


def _counts(pred, y):
    p = as_mask(pred).astype(bool)
    t = as_mask(y).astype(bool)
    if p.shape != t.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {t.shape}")
    inter = int(np.count_nonzero(p & t))
    return inter, int(np.count_nonzero(p)), int(np.count_nonzero(t))


def dice(pred, y) -> float:
    """Dice overlap 2|p&y| / (|p|+|y|); two empty masks score 1.0."""
    inter, np_, ny = _counts(pred, y)
    if np_ + ny == 0:
        return 1.0
    return 2.0 * inter / (np_ + ny)


def iou(pred, y) -> float:
    """Intersection over union; two empty masks score 1.0."""
    inter, np_, ny = _counts(pred, y)
    union = np_ + ny - inter
    if union == 0:
        return 1.0
    return inter / union


def seg_score(pred, y) -> SegScore:
    return SegScore(dice=dice(pred, y), iou=iou(pred, y))


def ground_truth_angle(p, q) -> float:
    """Angle in degrees between two marker vectors, in [0, 180].

    The cosine is clamped to [-1, 1] before acos to absorb rounding.
    """
    if not isinstance(p, MarkerVector):
        p = MarkerVector(*p)
    if not isinstance(q, MarkerVector):
        q = MarkerVector(*q)
    cosang = (p.dx * q.dx + p.dy * q.dy) / (p.norm * q.norm)
    return math.degrees(math.acos(max(-1.0, min(1.0, cosang))))


def rotational_error(predicted: float, ground_truth: float) -> float:
    """Absolute difference in degrees between predicted and true angle."""
    return abs(float(predicted) - float(ground_truth))


def trace_errors(trace) -> list[float]:
    """Per-frame REs of a trace (filtered angle vs ground truth)."""
    if not trace.ground_truth:
        raise ValueError("trace has no ground truth")
    return [rotational_error(s.filtered_angle, g)
            for s, g in zip(trace.samples, trace.ground_truth)]


def mare(re_series) -> MareReport:
    """Aggregate per-frame RE series into per-lift stats and the MARE.

    Uses the population standard deviation within each lift.
    """
    series = [np.asarray(s, dtype=np.float64) for s in re_series]
    if not series:
        raise ValueError("need at least one lift")
    for s in series:
        if s.size == 0:
            raise ValueError("each RE series must be non-empty")
    means = tuple(float(s.mean()) for s in series)
    stds = tuple(float(s.std()) for s in series)
    return MareReport(per_lift_mean_re=means, per_lift_std=stds,
                      mare=float(np.mean(means)), mare_std=float(np.mean(stds)))


def window_sweep(lifts, kind: EstimatorKind,
                 sizes=DEFAULT_WINDOW_SIZES, **params) -> dict[int, MareReport]:
    """MARE per window size for one estimator.

    ``lifts`` is a sequence of (masks, ground_truth_angles) pairs.  Axis
    estimates are computed once per lift and reused across sizes, since
    only the filtering stage depends on the window.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValueError("need at least one window size")
    per_lift_axes = [(axis_series(masks, kind, **params), gt)
                     for masks, gt in lifts]
    out = {}
    for n in sizes:
        res = []
        for axes, gt in per_lift_axes:
            trace = trace_from_axes(axes, n, ground_truth=gt)
            res.append(trace_errors(trace))
        out[int(n)] = mare(res)
    return out


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def sweep_table_rows(results: dict[str, dict[int, MareReport]]):
    """Flatten {estimator: {size: report}} into CSV-ready rows."""
    rows = []
    for est in sorted(results):
        for size in sorted(results[est]):
            r = results[est][size]
            rows.append({"estimator": est, "window": size,
                         "mare": r.mare, "mare_std": r.mare_std})
    return rows


def write_sweep_csv(path, results) -> None:
    rows = sweep_table_rows(results)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("estimator,window,mare_deg,mare_std_deg\n")
        for r in rows:
            fh.write(f"{r['estimator']},{r['window']},"
                     f"{r['mare']:.6f},{r['mare_std']:.6f}\n")


def write_sweep_json(path, results) -> None:
    payload = {est: {str(size): {"mare": rep.mare, "mare_std": rep.mare_std,
                                 "per_lift_mean_re": list(rep.per_lift_mean_re),
                                 "per_lift_std": list(rep.per_lift_std)}
                     for size, rep in by_size.items()}
               for est, by_size in results.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
